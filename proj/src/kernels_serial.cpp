#include <cmath>

#include "giftforge/kernels.hpp"

// Plain per-cell reference implementations. Slow on purpose; tests compare
// them against the word-parallel kernels and the benchmark times the gap.

namespace gf::kernels::serial {

CombineCounts combine(VoxelSolid& out, const VoxelSolid& a, const VoxelSolid& b, BoolOp op) {
  const int r = out.resolution();
  CombineCounts c;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        const Vec3 p = out.cell_center(x, y, z);
        const bool va = a.sample(p);
        const bool vb = b.sample(p);
        c.a += va;
        c.b += vb;
        c.both += va && vb;
        c.either += va || vb;
        bool v = false;
        switch (op) {
          case BoolOp::Union:
            v = va || vb;
            break;
          case BoolOp::Cut:
            v = va && !vb;
            break;
          case BoolOp::Intersect:
            v = va && vb;
            break;
        }
        c.result += v;
        out.set(x, y, z, v);
      }
  return c;
}

MomentSums moments(const VoxelSolid& s) {
  const int r = s.resolution();
  MomentSums m;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        if (!s.get(x, y, z)) continue;
        ++m.n;
        m.sx += x;
        m.sy += y;
        m.sz += z;
        m.sxx += static_cast<std::int64_t>(x) * x;
        m.syy += static_cast<std::int64_t>(y) * y;
        m.szz += static_cast<std::int64_t>(z) * z;
        m.sxy += static_cast<std::int64_t>(x) * y;
        m.sxz += static_cast<std::int64_t>(x) * z;
        m.syz += static_cast<std::int64_t>(y) * z;
      }
  return m;
}

OverlapCounts overlap(const VoxelSolid& a, const VoxelSolid& b) {
  const int r = a.resolution();
  OverlapCounts c;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        const bool va = a.get(x, y, z);
        const bool vb = b.get(x, y, z);
        c.intersection += va && vb;
        c.union_count += va || vb;
      }
  return c;
}

void resample(VoxelSolid& out, const VoxelSolid& src, const AffineMap& world_from_out) {
  const int r = out.resolution();
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x)
        out.set(x, y, z, src.sample(world_from_out.apply(out.cell_center(x, y, z))));
}

VoxelSolid rotate_cubic(const VoxelSolid& in, const SignedPerm& rot) {
  const int r = in.resolution();
  VoxelSolid out(r, in.origin(), in.cell_size());
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        const int c2[3] = {2 * x - (r - 1), 2 * y - (r - 1), 2 * z - (r - 1)};
        int s2[3];
        for (int axis = 0; axis < 3; ++axis) s2[rot.perm[axis]] = rot.sign[axis] * c2[axis];
        out.set(x, y, z,
                in.get((s2[0] + r - 1) / 2, (s2[1] + r - 1) / 2, (s2[2] + r - 1) / 2));
      }
  return out;
}

void raycast(const VoxelSolid& s, const OrthoCamera& cam, int width, int height,
             std::span<double> depth) {
  const double back_off = s.resolution() * s.cell_size() * 2.0;
  for (int py = 0; py < height; ++py)
    for (int px = 0; px < width; ++px) {
      const double u = (px + 0.5 - width * 0.5) * cam.mm_per_px;
      const double v = (height * 0.5 - (py + 0.5)) * cam.mm_per_px;
      const Vec3 on_plane = cam.center + cam.right * u + cam.up * v;
      depth[static_cast<std::size_t>(py) * width + px] =
          trace_ray(s, on_plane - cam.dir * back_off, cam.dir, cam.center);
    }
}

}  // namespace gf::kernels::serial
