#include "giftforge/executor.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace gf::exec {
namespace {

using dsl::Opcode;
using dsl::Statement;
using kernels::BoolOp;

struct Sketch {
  enum class Kind { Rect, Circle, Poly } kind;
  double a = 0.0;                // rect width / circle radius
  double b = 0.0;                // rect height
  std::vector<double> pts;       // poly u0 v0 u1 v1 ...

  bool contains(double u, double v) const {
    switch (kind) {
      case Kind::Rect:
        return std::fabs(u) <= a * 0.5 && std::fabs(v) <= b * 0.5;
      case Kind::Circle:
        return u * u + v * v <= a * a;
      case Kind::Poly: {
        // Even-odd crossing rule.
        bool inside = false;
        const std::size_t n = pts.size() / 2;
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
          const double xi = pts[2 * i], yi = pts[2 * i + 1];
          const double xj = pts[2 * j], yj = pts[2 * j + 1];
          if ((yi > v) != (yj > v) && u < (xj - xi) * (v - yi) / (yj - yi) + xi)
            inside = !inside;
        }
        return inside;
      }
    }
    return false;
  }

  void bounds(double& ulo, double& vlo, double& uhi, double& vhi) const {
    switch (kind) {
      case Kind::Rect:
        ulo = -a * 0.5;
        uhi = a * 0.5;
        vlo = -b * 0.5;
        vhi = b * 0.5;
        return;
      case Kind::Circle:
        ulo = vlo = -a;
        uhi = vhi = a;
        return;
      case Kind::Poly: {
        ulo = vlo = std::numeric_limits<double>::infinity();
        uhi = vhi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
          ulo = std::min(ulo, pts[i]);
          uhi = std::max(uhi, pts[i]);
          vlo = std::min(vlo, pts[i + 1]);
          vhi = std::max(vhi, pts[i + 1]);
        }
        return;
      }
    }
  }
};

struct PendingSketch {
  Sketch sketch;
  int plane = dsl::kPlaneXY;
  double plane_offset = 0.0;
  Vec3 frame_offset{};
};

// An extruded sketch captured with the builder state current at EXTRUDE time.
struct Prism {
  Sketch sketch;
  int plane;
  double plane_offset;
  double distance;
  Vec3 frame_offset;

  // Maps a world point into (u, v, w): sketch coordinates plus the distance
  // along the extrusion normal measured from the workplane.
  void decompose(const Vec3& p, double& u, double& v, double& w) const {
    const Vec3 q = p - frame_offset;
    switch (plane) {
      case dsl::kPlaneXY:
        u = q.x;
        v = q.y;
        w = q.z;
        return;
      case dsl::kPlaneYZ:
        u = q.y;
        v = q.z;
        w = q.x;
        return;
      default:  // XZ
        u = q.x;
        v = q.z;
        w = q.y;
        return;
    }
  }

  bool contains(const Vec3& p) const {
    double u, v, w;
    decompose(p, u, v, w);
    if (w < plane_offset || w > plane_offset + distance) return false;
    return sketch.contains(u, v);
  }

  Aabb aabb() const {
    double ulo, vlo, uhi, vhi;
    sketch.bounds(ulo, vlo, uhi, vhi);
    const double wlo = plane_offset;
    const double whi = plane_offset + distance;
    Aabb box;
    switch (plane) {
      case dsl::kPlaneXY:
        box = {{ulo, vlo, wlo}, {uhi, vhi, whi}};
        break;
      case dsl::kPlaneYZ:
        box = {{wlo, ulo, vlo}, {whi, uhi, vhi}};
        break;
      default:
        box = {{ulo, wlo, vlo}, {uhi, whi, vhi}};
        break;
    }
    box.lo += frame_offset;
    box.hi += frame_offset;
    return box;
  }
};

bool segments_intersect(double ax, double ay, double bx, double by, double cx, double cy,
                        double dx, double dy) {
  auto orient = [](double px, double py, double qx, double qy, double rx, double ry) {
    const double v = (qx - px) * (ry - py) - (qy - py) * (rx - px);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  };
  const int o1 = orient(ax, ay, bx, by, cx, cy);
  const int o2 = orient(ax, ay, bx, by, dx, dy);
  const int o3 = orient(cx, cy, dx, dy, ax, ay);
  const int o4 = orient(cx, cy, dx, dy, bx, by);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

std::optional<ExecError> validate_sketch(const Sketch& sk) {
  switch (sk.kind) {
    case Sketch::Kind::Rect:
      if (sk.a <= 0.0 || sk.b <= 0.0) return ExecError{"rect sketch has zero area"};
      return std::nullopt;
    case Sketch::Kind::Circle:
      if (sk.a <= 0.0) return ExecError{"circle sketch has zero area"};
      return std::nullopt;
    case Sketch::Kind::Poly: {
      const std::size_t n = sk.pts.size() / 2;
      double area2 = 0.0;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        area2 += sk.pts[2 * j] * sk.pts[2 * i + 1] - sk.pts[2 * i] * sk.pts[2 * j + 1];
      if (std::fabs(area2) < 1e-12) return ExecError{"poly sketch has zero area"};
      // Proper crossings between non-adjacent edges.
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t i2 = (i + 1) % n;
        for (std::size_t j = i + 1; j < n; ++j) {
          const std::size_t j2 = (j + 1) % n;
          if (i == j || i2 == j || j2 == i) continue;
          if (segments_intersect(sk.pts[2 * i], sk.pts[2 * i + 1], sk.pts[2 * i2],
                                 sk.pts[2 * i2 + 1], sk.pts[2 * j], sk.pts[2 * j + 1],
                                 sk.pts[2 * j2], sk.pts[2 * j2 + 1]))
            return ExecError{"poly sketch is self-intersecting"};
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

VoxelSolid voxelize_prism(const Prism& prism, int resolution) {
  VoxelSolid grid = make_fitted_grid(prism.aabb(), resolution);
  kernels::fill(grid, [&](const Vec3& p) { return prism.contains(p); });
  return grid;
}

// Shared grid for a boolean, reusing `anchor`'s cell size and alignment so
// the anchor operand samples exactly and only the other operand is
// re-quantized. Cell counts grow with the content; callers fall back to a
// fresh fitted cube when the aligned grid would be oversized.
std::optional<VoxelSolid> aligned_grid(const VoxelSolid& anchor, const Aabb& content,
                                       int resolution) {
  const double h = anchor.cell_size();
  int lo[3];
  int count = 0;
  const double content_lo[3] = {content.lo.x, content.lo.y, content.lo.z};
  const double content_hi[3] = {content.hi.x, content.hi.y, content.hi.z};
  const double origin[3] = {anchor.origin().x, anchor.origin().y, anchor.origin().z};
  for (int axis = 0; axis < 3; ++axis) {
    lo[axis] = static_cast<int>(std::floor((content_lo[axis] - origin[axis]) / h)) - 1;
    const int hi = static_cast<int>(std::floor((content_hi[axis] - origin[axis]) / h)) + 1;
    count = std::max(count, hi - lo[axis] + 1);
  }
  if (count > 2 * resolution) return std::nullopt;
  return VoxelSolid(count,
                    {origin[0] + lo[0] * h, origin[1] + lo[1] * h, origin[2] + lo[2] * h}, h);
}

// Final solids are delivered on a snug padded bounding cube at the requested
// resolution; intermediate booleans may ride on larger aligned grids.
VoxelSolid finalize_grid(VoxelSolid&& s, int resolution) {
  const auto bounds = s.occupied_bounds();
  const int max_cells = std::max({(*bounds)[3] - (*bounds)[0], (*bounds)[4] - (*bounds)[1],
                                  (*bounds)[5] - (*bounds)[2]}) +
                        1;
  if (s.resolution() == resolution && max_cells >= resolution - 6) return std::move(s);
  VoxelSolid out = make_fitted_grid(*s.occupied_aabb(), resolution);
  kernels::resample(out, s, kernels::AffineMap{});
  return out;
}

}  // namespace

ExecResult boolean_op(const VoxelSolid& a, const VoxelSolid& b, BoolOp op, int resolution) {
  const auto abox = a.occupied_aabb();
  const auto bbox = b.occupied_aabb();
  if (!abox) return NotSolid{};
  Aabb target;
  switch (op) {
    case BoolOp::Union:
      if (!bbox) return NotSolid{};
      target = Aabb::join(*abox, *bbox);
      break;
    case BoolOp::Cut:
      target = *abox;
      break;
    case BoolOp::Intersect: {
      if (!bbox) return NotSolid{};
      target = Aabb::intersect(*abox, *bbox);
      if (target.empty()) return NotSolid{};
      break;
    }
  }
  // CUT results live inside a, so a is the natural anchor; otherwise anchor
  // on the finer operand.
  const VoxelSolid& anchor =
      op == BoolOp::Cut ? a : (a.cell_size() <= b.cell_size() ? a : b);
  auto grid = aligned_grid(anchor, target, resolution);
  VoxelSolid out = grid ? std::move(*grid) : make_fitted_grid(target, resolution);
  const kernels::CombineCounts counts = kernels::combine(out, a, b, op);
  assert(counts.either == counts.a + counts.b - counts.both);
  (void)counts;
  if (out.empty()) return NotSolid{};
  return std::move(out);
}

ExecResult execute(const dsl::CadProgram& p, int resolution) {
  std::vector<PendingSketch> sketch_stack;
  std::vector<VoxelSolid> solid_stack;
  int plane = dsl::kPlaneXY;
  double plane_offset = 0.0;
  Vec3 frame_offset{};

  for (const Statement& st : p.statements) {
    switch (st.op) {
      case Opcode::Plane:
        plane = static_cast<int>(st.args[0]);
        plane_offset = st.args[1];
        break;
      case Opcode::Translate:
        frame_offset += Vec3{st.args[0], st.args[1], st.args[2]};
        break;
      case Opcode::Rect:
      case Opcode::Circle:
      case Opcode::Poly: {
        Sketch sk;
        if (st.op == Opcode::Rect) {
          sk.kind = Sketch::Kind::Rect;
          sk.a = st.args[0];
          sk.b = st.args[1];
        } else if (st.op == Opcode::Circle) {
          sk.kind = Sketch::Kind::Circle;
          sk.a = st.args[0];
        } else {
          sk.kind = Sketch::Kind::Poly;
          sk.pts = st.args;
        }
        if (auto bad = validate_sketch(sk)) return *bad;
        sketch_stack.push_back({std::move(sk), plane, plane_offset, frame_offset});
        break;
      }
      case Opcode::Extrude: {
        PendingSketch pending = std::move(sketch_stack.back());
        sketch_stack.pop_back();
        const Prism prism{std::move(pending.sketch), pending.plane, pending.plane_offset,
                          st.args[0], pending.frame_offset};
        VoxelSolid solid = voxelize_prism(prism, resolution);
        if (solid.empty()) return NotSolid{};
        solid_stack.push_back(std::move(solid));
        break;
      }
      case Opcode::Union:
      case Opcode::Cut:
      case Opcode::Intersect: {
        VoxelSolid rhs = std::move(solid_stack.back());
        solid_stack.pop_back();
        VoxelSolid lhs = std::move(solid_stack.back());
        solid_stack.pop_back();
        const BoolOp op = st.op == Opcode::Union  ? BoolOp::Union
                          : st.op == Opcode::Cut ? BoolOp::Cut
                                                 : BoolOp::Intersect;
        ExecResult combined = boolean_op(lhs, rhs, op, resolution);
        if (!std::holds_alternative<VoxelSolid>(combined)) return combined;
        solid_stack.push_back(std::move(std::get<VoxelSolid>(combined)));
        break;
      }
    }
  }
  return finalize_grid(std::move(solid_stack.back()), resolution);
}

}  // namespace gf::exec
