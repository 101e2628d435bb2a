#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>

#include "giftforge/geom3.hpp"
#include "giftforge/voxel.hpp"

// Grid kernels, OpenMP-parallel over 64-cell words. Every kernel either
// writes each output word from exactly one iteration or reduces integers, so
// results are bit-identical for any thread count. gf::kernels::serial holds
// plain per-cell reference implementations used by tests and the benchmark.

namespace gf::kernels {

enum class BoolOp { Union, Cut, Intersect };

struct MomentSums {
  std::int64_t n = 0;
  std::int64_t sx = 0, sy = 0, sz = 0;
  std::int64_t sxx = 0, syy = 0, szz = 0;
  std::int64_t sxy = 0, sxz = 0, syz = 0;
};

// Cell counts on the shared grid of a combine step.
struct CombineCounts {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t both = 0;
  std::int64_t either = 0;
  std::int64_t result = 0;
};

struct OverlapCounts {
  std::int64_t intersection = 0;
  std::int64_t union_count = 0;
};

// Signed axis permutation; matrix M has M[i][perm[i]] = sign[i].
struct SignedPerm {
  std::array<int, 3> perm{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};

  Mat3 matrix() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.m[i][perm[i]] = sign[i];
    return r;
  }
  int determinant() const {
    const int parity = (perm[0] == 0 && perm[1] == 1 && perm[2] == 2) ||
                               (perm[0] == 1 && perm[1] == 2 && perm[2] == 0) ||
                               (perm[0] == 2 && perm[1] == 0 && perm[2] == 1)
                           ? 1
                           : -1;
    return parity * sign[0] * sign[1] * sign[2];
  }
};

// world = linear * q + offset
struct AffineMap {
  Mat3 linear = Mat3::identity();
  Vec3 offset{};
  Vec3 apply(const Vec3& q) const { return linear * q + offset; }
};

struct OrthoCamera {
  Vec3 dir;     // unit viewing direction
  Vec3 right;   // unit screen basis
  Vec3 up;
  Vec3 center;  // world point on the reference plane
  double mm_per_px = 1.0;
};

inline constexpr double kRayMiss = -1.0;

template <class Pred>
void fill(VoxelSolid& out, Pred&& inside) {
  const int r = out.resolution();
  const std::int64_t total = static_cast<std::int64_t>(r) * r * r;
  auto words = out.words();
  const std::int64_t nwords = static_cast<std::int64_t>(words.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t w = 0; w < nwords; ++w) {
    const std::int64_t base = w * 64;
    const int n = static_cast<int>(std::min<std::int64_t>(64, total - base));
    int x = static_cast<int>(base % r);
    int y = static_cast<int>((base / r) % r);
    int z = static_cast<int>(base / (static_cast<std::int64_t>(r) * r));
    std::uint64_t bits = 0;
    for (int i = 0; i < n; ++i) {
      if (inside(out.cell_center(x, y, z))) bits |= 1ULL << i;
      if (++x == r) {
        x = 0;
        if (++y == r) {
          y = 0;
          ++z;
        }
      }
    }
    words[w] = bits;
  }
  out.recount();
}

CombineCounts combine(VoxelSolid& out, const VoxelSolid& a, const VoxelSolid& b, BoolOp op);
MomentSums moments(const VoxelSolid& s);
// Requires identical grids.
OverlapCounts overlap(const VoxelSolid& a, const VoxelSolid& b);
void resample(VoxelSolid& out, const VoxelSolid& src, const AffineMap& world_from_out);
// Exact cell permutation about the grid center; output shares the grid
// geometry of the input.
VoxelSolid rotate_cubic(const VoxelSolid& in, const SignedPerm& rot);
// Per-pixel first-hit distance from the camera plane along dir; kRayMiss for
// background. depth.size() == width * height, row-major, row 0 at the top.
void raycast(const VoxelSolid& s, const OrthoCamera& cam, int width, int height,
             std::span<double> depth);

namespace serial {

template <class Pred>
void fill(VoxelSolid& out, Pred&& inside) {
  const int r = out.resolution();
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) out.set(x, y, z, inside(out.cell_center(x, y, z)));
}

CombineCounts combine(VoxelSolid& out, const VoxelSolid& a, const VoxelSolid& b, BoolOp op);
MomentSums moments(const VoxelSolid& s);
OverlapCounts overlap(const VoxelSolid& a, const VoxelSolid& b);
void resample(VoxelSolid& out, const VoxelSolid& src, const AffineMap& world_from_out);
VoxelSolid rotate_cubic(const VoxelSolid& in, const SignedPerm& rot);
void raycast(const VoxelSolid& s, const OrthoCamera& cam, int width, int height,
             std::span<double> depth);

}  // namespace serial

// Shared single-ray DDA used by both raycast drivers.
double trace_ray(const VoxelSolid& s, const Vec3& ray_origin, const Vec3& dir,
                 const Vec3& plane_point);

}  // namespace gf::kernels
