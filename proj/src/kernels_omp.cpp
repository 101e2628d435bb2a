#include <bit>
#include <cmath>
#include <limits>

#include "giftforge/kernels.hpp"

namespace gf::kernels {

namespace {

inline bool apply_op(bool va, bool vb, BoolOp op) {
  switch (op) {
    case BoolOp::Union:
      return va || vb;
    case BoolOp::Cut:
      return va && !vb;
    case BoolOp::Intersect:
      return va && vb;
  }
  return false;
}

}  // namespace

CombineCounts combine(VoxelSolid& out, const VoxelSolid& a, const VoxelSolid& b, BoolOp op) {
  const int r = out.resolution();
  const std::int64_t total = static_cast<std::int64_t>(r) * r * r;
  auto words = out.words();
  const std::int64_t nwords = static_cast<std::int64_t>(words.size());
  std::int64_t ca = 0, cb = 0, cboth = 0, ceither = 0, cres = 0;
#pragma omp parallel for schedule(static) reduction(+ : ca, cb, cboth, ceither, cres)
  for (std::int64_t w = 0; w < nwords; ++w) {
    const std::int64_t base = w * 64;
    const int n = static_cast<int>(std::min<std::int64_t>(64, total - base));
    int x = static_cast<int>(base % r);
    int y = static_cast<int>((base / r) % r);
    int z = static_cast<int>(base / (static_cast<std::int64_t>(r) * r));
    std::uint64_t bits = 0;
    for (int i = 0; i < n; ++i) {
      const Vec3 p = out.cell_center(x, y, z);
      const bool va = a.sample(p);
      const bool vb = b.sample(p);
      ca += va;
      cb += vb;
      cboth += va && vb;
      ceither += va || vb;
      const bool v = apply_op(va, vb, op);
      cres += v;
      if (v) bits |= 1ULL << i;
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
  return {ca, cb, cboth, ceither, cres};
}

MomentSums moments(const VoxelSolid& s) {
  const int r = s.resolution();
  auto words = s.words();
  const std::int64_t nwords = static_cast<std::int64_t>(words.size());
  std::int64_t n = 0, sx = 0, sy = 0, sz = 0;
  std::int64_t sxx = 0, syy = 0, szz = 0, sxy = 0, sxz = 0, syz = 0;
#pragma omp parallel for schedule(static) \
    reduction(+ : n, sx, sy, sz, sxx, syy, szz, sxy, sxz, syz)
  for (std::int64_t w = 0; w < nwords; ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      const std::int64_t idx = w * 64 + i;
      const std::int64_t x = idx % r;
      const std::int64_t y = (idx / r) % r;
      const std::int64_t z = idx / (static_cast<std::int64_t>(r) * r);
      ++n;
      sx += x;
      sy += y;
      sz += z;
      sxx += x * x;
      syy += y * y;
      szz += z * z;
      sxy += x * y;
      sxz += x * z;
      syz += y * z;
    }
  }
  return {n, sx, sy, sz, sxx, syy, szz, sxy, sxz, syz};
}

OverlapCounts overlap(const VoxelSolid& a, const VoxelSolid& b) {
  auto wa = a.words();
  auto wb = b.words();
  const std::int64_t nwords = static_cast<std::int64_t>(wa.size());
  std::int64_t inter = 0, uni = 0;
#pragma omp parallel for schedule(static) reduction(+ : inter, uni)
  for (std::int64_t w = 0; w < nwords; ++w) {
    inter += std::popcount(wa[w] & wb[w]);
    uni += std::popcount(wa[w] | wb[w]);
  }
  return {inter, uni};
}

void resample(VoxelSolid& out, const VoxelSolid& src, const AffineMap& world_from_out) {
  fill(out, [&](const Vec3& q) { return src.sample(world_from_out.apply(q)); });
}

VoxelSolid rotate_cubic(const VoxelSolid& in, const SignedPerm& rot) {
  const int r = in.resolution();
  VoxelSolid out(r, in.origin(), in.cell_size());
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
      // Doubled centered coordinates keep the permutation integer-exact.
      const int c2[3] = {2 * x - (r - 1), 2 * y - (r - 1), 2 * z - (r - 1)};
      int s2[3];
      for (int axis = 0; axis < 3; ++axis) s2[rot.perm[axis]] = rot.sign[axis] * c2[axis];
      const int sx = (s2[0] + r - 1) / 2;
      const int sy = (s2[1] + r - 1) / 2;
      const int sz = (s2[2] + r - 1) / 2;
      if (in.get(sx, sy, sz)) bits |= 1ULL << i;
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
  return out;
}

double trace_ray(const VoxelSolid& s, const Vec3& ray_origin, const Vec3& dir,
                 const Vec3& plane_point) {
  const int r = s.resolution();
  const double h = s.cell_size();
  const Vec3 bmin = s.origin();
  const Vec3 bmax = bmin + Vec3{r * h, r * h, r * h};

  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  const double o[3] = {ray_origin.x, ray_origin.y, ray_origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {bmin.x, bmin.y, bmin.z};
  const double hi[3] = {bmax.x, bmax.y, bmax.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return kRayMiss;
      continue;
    }
    double t0 = (lo[axis] - o[axis]) / d[axis];
    double t1 = (hi[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return kRayMiss;

  const Vec3 start = ray_origin + dir * t_enter;
  int ix[3];
  for (int axis = 0; axis < 3; ++axis) {
    const double f = ((axis == 0 ? start.x : axis == 1 ? start.y : start.z) - lo[axis]) / h;
    ix[axis] = std::clamp(static_cast<int>(f), 0, r - 1);
  }
  int step[3];
  double t_max[3], t_delta[3];
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] > 0.0) {
      step[axis] = 1;
      t_max[axis] = ((lo[axis] + (ix[axis] + 1) * h) - o[axis]) / d[axis];
      t_delta[axis] = h / d[axis];
    } else if (d[axis] < 0.0) {
      step[axis] = -1;
      t_max[axis] = ((lo[axis] + ix[axis] * h) - o[axis]) / d[axis];
      t_delta[axis] = -h / d[axis];
    } else {
      step[axis] = 0;
      t_max[axis] = std::numeric_limits<double>::infinity();
      t_delta[axis] = std::numeric_limits<double>::infinity();
    }
  }

  double t_curr = t_enter;
  while (true) {
    if (s.get(ix[0], ix[1], ix[2])) {
      const Vec3 hit = ray_origin + dir * t_curr;
      return (hit - plane_point).dot(dir);
    }
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    t_curr = t_max[axis];
    ix[axis] += step[axis];
    if (ix[axis] < 0 || ix[axis] >= r) return kRayMiss;
    t_max[axis] += t_delta[axis];
  }
}

void raycast(const VoxelSolid& s, const OrthoCamera& cam, int width, int height,
             std::span<double> depth) {
  const int r = s.resolution();
  const double back_off = r * s.cell_size() * 2.0;
#pragma omp parallel for schedule(static)
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const double u = (px + 0.5 - width * 0.5) * cam.mm_per_px;
      const double v = (height * 0.5 - (py + 0.5)) * cam.mm_per_px;
      const Vec3 on_plane = cam.center + cam.right * u + cam.up * v;
      const Vec3 origin = on_plane - cam.dir * back_off;
      depth[static_cast<std::size_t>(py) * width + px] =
          trace_ray(s, origin, cam.dir, cam.center);
    }
  }
}

}  // namespace gf::kernels
