#pragma once

#include <string>
#include <variant>

#include "giftforge/dsl.hpp"
#include "giftforge/kernels.hpp"
#include "giftforge/voxel.hpp"

namespace gf::exec {

// Geometric failure while executing a parseable program ("Failed OCC" class):
// degenerate sketches, self-intersecting polygons.
struct ExecError {
  std::string message;
};

// The program executed but produced empty occupancy.
struct NotSolid {};

using ExecResult = std::variant<VoxelSolid, ExecError, NotSolid>;

inline constexpr int kDefaultResolution = 64;

// Deterministic CSG evaluation of a stack-safe program onto a padded bounding
// cube at `resolution` cells per axis. Cell-center sampling throughout.
ExecResult execute(const dsl::CadProgram& p, int resolution = kDefaultResolution);

// Set operation on two voxel solids; both operands are resampled onto a fresh
// grid fitted to the predicted result bounds. In debug builds the
// inclusion-exclusion identity |A or B| = |A| + |B| - |A and B| is asserted on
// the shared-grid counts.
ExecResult boolean_op(const VoxelSolid& a, const VoxelSolid& b, kernels::BoolOp op,
                      int resolution);

}  // namespace gf::exec
