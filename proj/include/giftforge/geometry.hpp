#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "giftforge/geom3.hpp"
#include "giftforge/kernels.hpp"
#include "giftforge/voxel.hpp"

namespace gf::geom {

struct DegenerateShape {
  std::string message;
};

struct InertiaSummary {
  Vec3 centroid;                        // mm
  Mat3 tensor;                          // unit-mass inertia about the centroid, mm^2
  double trace = 0.0;
  std::array<double, 3> eigenvalues{};  // ascending
  Mat3 eigenvectors;                    // columns = principal axes, right-handed
};

// Unit total mass distributed uniformly over the occupied cells, each treated
// as a small solid cube. Requires a non-empty solid.
std::variant<InertiaSummary, DegenerateShape> inertia(const VoxelSolid& s);

struct JacobiResult {
  std::array<double, 3> values;  // ascending
  Mat3 vectors;                  // columns, orthonormal, det +1
  int sweeps = 0;
};

// Cyclic Jacobi for a symmetric 3x3; iterates until the off-diagonal norm
// drops below 1e-10 or 64 sweeps.
JacobiResult jacobi_eigen_sym3(const Mat3& a);

inline constexpr double kTraceTarget = 3.0;

struct NormalizedSolid {
  VoxelSolid grid;
  double applied_scale = 1.0;
  Mat3 applied_rotation;  // principal axes used (columns), det +1
};

// Centroid to the grid center, uniform scale to inertia trace 3.0, principal
// axes onto the grid axes in eigenvalue-ascending order, re-voxelized by
// inverse-transform cell-center sampling.
std::variant<NormalizedSolid, DegenerateShape> normalize(const VoxelSolid& s, int resolution);

// |A and B| / |A or B| on identical grids; nullopt on grid mismatch.
std::optional<double> voxel_iou(const VoxelSolid& a, const VoxelSolid& b);

// The 24 proper rotations of the cube group (index 0 = identity) and the
// 48-element variant including reflections.
std::span<const kernels::SignedPerm> cube_rotations();
std::span<const kernels::SignedPerm> cube_orientations48();

struct IouBestResult {
  double score = 0.0;
  int rotation_index = 0;
};

// IoU-best protocol: normalize both solids into a shared frame, then maximize
// voxel IoU over the orientation set applied to `a`. Ties resolve to the
// lowest rotation index.
std::variant<IouBestResult, DegenerateShape> iou_best(const VoxelSolid& a, const VoxelSolid& b,
                                                      int resolution, int orientations = 24);

}  // namespace gf::geom
