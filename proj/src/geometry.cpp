#include "giftforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gf::geom {
namespace {

using kernels::SignedPerm;

std::vector<SignedPerm> make_orientations(bool proper_only) {
  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<SignedPerm> out;
  for (const auto& perm : kPerms)
    for (int bits = 0; bits < 8; ++bits) {
      SignedPerm sp;
      sp.perm = perm;
      sp.sign = {(bits & 1) ? -1 : 1, (bits & 2) ? -1 : 1, (bits & 4) ? -1 : 1};
      if (!proper_only || sp.determinant() == 1) out.push_back(sp);
    }
  return out;
}

const std::vector<SignedPerm>& rotations24() {
  static const std::vector<SignedPerm> r = make_orientations(true);
  return r;
}

const std::vector<SignedPerm>& orientations48() {
  static const std::vector<SignedPerm> r = make_orientations(false);
  return r;
}

}  // namespace

std::span<const SignedPerm> cube_rotations() { return rotations24(); }
std::span<const SignedPerm> cube_orientations48() { return orientations48(); }

JacobiResult jacobi_eigen_sym3(const Mat3& a) {
  Mat3 d = a;
  Mat3 v = Mat3::identity();
  JacobiResult result;

  auto off_norm = [](const Mat3& m) {
    return std::sqrt(2.0 * (m.m[0][1] * m.m[0][1] + m.m[0][2] * m.m[0][2] +
                            m.m[1][2] * m.m[1][2]));
  };

  for (int sweep = 0; sweep < 64; ++sweep) {
    if (off_norm(d) < 1e-10) break;
    result.sweeps = sweep + 1;
    static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pair : kPairs) {
      const int p = pair[0], q = pair[1];
      if (d.m[p][q] == 0.0) continue;
      const double theta = (d.m[q][q] - d.m[p][p]) / (2.0 * d.m[p][q]);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;

      Mat3 rot = Mat3::identity();
      rot.m[p][p] = c;
      rot.m[q][q] = c;
      rot.m[p][q] = s;
      rot.m[q][p] = -s;
      d = rot.transposed() * d * rot;
      d.m[p][q] = d.m[q][p] = 0.0;  // kill residual round-off
      v = v * rot;
    }
  }

  // Ascending eigenvalue order.
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return d.m[i][i] < d.m[j][j]; });
  Mat3 sorted;
  for (int j = 0; j < 3; ++j) {
    result.values[j] = d.m[order[j]][order[j]];
    sorted.set_col(j, v.col(order[j]));
  }

  // Deterministic signs: largest-magnitude component of the first two columns
  // positive, third column from the cross product for an exact det +1.
  for (int j = 0; j < 2; ++j) {
    Vec3 col = sorted.col(j);
    int arg = 0;
    for (int i = 1; i < 3; ++i)
      if (std::fabs(col[i]) > std::fabs(col[arg])) arg = i;
    if (col[arg] < 0.0) sorted.set_col(j, col * -1.0);
  }
  sorted.set_col(2, sorted.col(0).cross(sorted.col(1)));
  result.vectors = sorted;
  return result;
}

std::variant<InertiaSummary, DegenerateShape> inertia(const VoxelSolid& s) {
  if (s.empty()) return DegenerateShape{"empty solid"};
  const kernels::MomentSums m = kernels::moments(s);
  const double h = s.cell_size();
  const double n = static_cast<double>(m.n);

  const auto mean = [&](std::int64_t sum) { return static_cast<double>(sum) / n; };
  const double mx = mean(m.sx), my = mean(m.sy), mz = mean(m.sz);

  InertiaSummary out;
  out.centroid = {s.origin().x + (mx + 0.5) * h, s.origin().y + (my + 0.5) * h,
                  s.origin().z + (mz + 0.5) * h};

  // Central second moments per axis; h^2/12 is the within-cell term of a
  // uniform cube cell.
  const double cell_var = h * h / 12.0;
  const double vxx = h * h * (mean(m.sxx) - mx * mx) + cell_var;
  const double vyy = h * h * (mean(m.syy) - my * my) + cell_var;
  const double vzz = h * h * (mean(m.szz) - mz * mz) + cell_var;
  const double vxy = h * h * (mean(m.sxy) - mx * my);
  const double vxz = h * h * (mean(m.sxz) - mx * mz);
  const double vyz = h * h * (mean(m.syz) - my * mz);

  out.tensor.m = {{{vyy + vzz, -vxy, -vxz}, {-vxy, vxx + vzz, -vyz}, {-vxz, -vyz, vxx + vyy}}};
  out.trace = out.tensor.m[0][0] + out.tensor.m[1][1] + out.tensor.m[2][2];

  const JacobiResult eig = jacobi_eigen_sym3(out.tensor);
  out.eigenvalues = eig.values;
  out.eigenvectors = eig.vectors;
  if (out.eigenvalues[0] < 1e-9 * std::max(out.eigenvalues[2], 0.0))
    return DegenerateShape{"planar or linear occupancy"};
  return out;
}

namespace {

struct NormalizeFrame {
  Vec3 centroid;
  double scale = 1.0;   // normalized = scale * R^T * (world - centroid)
  Mat3 axes;            // eigenvector columns
  double half_extent = 0.0;
};

std::variant<NormalizeFrame, DegenerateShape> compute_frame(const VoxelSolid& s) {
  auto summary = inertia(s);
  if (std::holds_alternative<DegenerateShape>(summary))
    return std::get<DegenerateShape>(summary);
  const InertiaSummary& info = std::get<InertiaSummary>(summary);

  NormalizeFrame frame;
  frame.centroid = info.centroid;
  frame.scale = std::sqrt(kTraceTarget / info.trace);
  frame.axes = info.eigenvectors;

  // Conservative normalized-space extent from the occupied box corners.
  const Aabb box = *s.occupied_aabb();
  const Mat3 world_to_norm = frame.axes.transposed();
  double half = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 p = {(corner & 1) ? box.hi.x : box.lo.x, (corner & 2) ? box.hi.y : box.lo.y,
                    (corner & 4) ? box.hi.z : box.lo.z};
    const Vec3 q = (world_to_norm * (p - frame.centroid)) * frame.scale;
    half = std::max({half, std::fabs(q.x), std::fabs(q.y), std::fabs(q.z)});
  }
  frame.half_extent = half;
  return frame;
}

VoxelSolid resample_into_frame(const VoxelSolid& s, const NormalizeFrame& frame,
                               double half_extent, int resolution) {
  // Symmetric cube about the centroid image (the grid center).
  const double h = 2.0 * half_extent / (resolution - 2);
  const double side = resolution * h;
  VoxelSolid grid(resolution, Vec3{-side / 2, -side / 2, -side / 2}, h);
  kernels::AffineMap map;
  const double inv_scale = 1.0 / frame.scale;
  Mat3 linear = frame.axes;
  for (auto& row : linear.m)
    for (double& v : row) v *= inv_scale;
  map.linear = linear;
  map.offset = frame.centroid;
  kernels::resample(grid, s, map);
  return grid;
}

}  // namespace

std::variant<NormalizedSolid, DegenerateShape> normalize(const VoxelSolid& s, int resolution) {
  auto frame = compute_frame(s);
  if (std::holds_alternative<DegenerateShape>(frame)) return std::get<DegenerateShape>(frame);
  const NormalizeFrame& f = std::get<NormalizeFrame>(frame);
  NormalizedSolid out;
  out.grid = resample_into_frame(s, f, f.half_extent, resolution);
  out.applied_scale = f.scale;
  out.applied_rotation = f.axes;
  return out;
}

std::optional<double> voxel_iou(const VoxelSolid& a, const VoxelSolid& b) {
  if (!a.same_grid(b)) return std::nullopt;
  const kernels::OverlapCounts c = kernels::overlap(a, b);
  if (c.union_count == 0) return 0.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_count);
}

std::variant<IouBestResult, DegenerateShape> iou_best(const VoxelSolid& a, const VoxelSolid& b,
                                                      int resolution, int orientations) {
  auto fa = compute_frame(a);
  if (std::holds_alternative<DegenerateShape>(fa)) return std::get<DegenerateShape>(fa);
  auto fb = compute_frame(b);
  if (std::holds_alternative<DegenerateShape>(fb)) return std::get<DegenerateShape>(fb);

  const NormalizeFrame& frame_a = std::get<NormalizeFrame>(fa);
  const NormalizeFrame& frame_b = std::get<NormalizeFrame>(fb);
  // A shared extent keeps both grids identical so rotations stay exact cell
  // permutations.
  const double half = std::max(frame_a.half_extent, frame_b.half_extent);
  const VoxelSolid grid_a = resample_into_frame(a, frame_a, half, resolution);
  const VoxelSolid grid_b = resample_into_frame(b, frame_b, half, resolution);

  const auto set = orientations == 48 ? cube_orientations48() : cube_rotations();
  IouBestResult best{-1.0, 0};
  for (int i = 0; i < static_cast<int>(set.size()); ++i) {
    const VoxelSolid rotated = kernels::rotate_cubic(grid_a, set[i]);
    const kernels::OverlapCounts c = kernels::overlap(rotated, grid_b);
    const double score =
        c.union_count == 0 ? 0.0
                           : static_cast<double>(c.intersection) / static_cast<double>(c.union_count);
    if (score > best.score) best = {score, i};
  }
  return best;
}

}  // namespace gf::geom
