#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <sstream>

#include "giftforge/dataset.hpp"
#include "giftforge/executor.hpp"
#include "util.hpp"

using namespace gf;

TEST_CASE("unit cube: volume within 5% of 1.0 at R=64") {
  const VoxelSolid s = testutil::solid_of("plane XY 0\nrect 1 1\nextrude 1\n", 64);
  CHECK(std::fabs(s.volume() - 1.0) / 1.0 < 0.05);
}

TEST_CASE("degenerate sketches fail execution, zero-length rect included") {
  const auto p = testutil::program_of("rect 0 5\nextrude 1\n");
  const auto r = exec::execute(p, 64);
  CHECK(std::holds_alternative<exec::ExecError>(r));

  const auto self_x = testutil::program_of("poly 0 0 2 0 0 1 2 1\nextrude 1\n");
  CHECK(std::holds_alternative<exec::ExecError>(exec::execute(self_x, 64)));
}

TEST_CASE("CUT of a solid from itself is NotSolid") {
  const auto p = testutil::program_of(
      "rect 1 1\nextrude 1\nrect 1 1\nextrude 1\ncut\n");
  CHECK(std::holds_alternative<exec::NotSolid>(exec::execute(p, 64)));
}

TEST_CASE("INTERSECT of disjoint solids is NotSolid") {
  const auto p = testutil::program_of(
      "rect 1 1\nextrude 1\ntranslate 5 0 0\nrect 1 1\nextrude 1\nintersect\n");
  CHECK(std::holds_alternative<exec::NotSolid>(exec::execute(p, 64)));
}

TEST_CASE("UNION with itself is idempotent on occupancy") {
  const VoxelSolid cube = testutil::solid_of("rect 1 1\nextrude 1\n", 64);
  const auto u = exec::boolean_op(cube, cube, kernels::BoolOp::Union, 64);
  REQUIRE(std::holds_alternative<VoxelSolid>(u));
  CHECK(std::get<VoxelSolid>(u).occupied_cells() == cube.occupied_cells());
}

TEST_CASE("offset unit cubes: union volume within 2% of 1.5 at R=128") {
  const auto p = testutil::program_of(
      "rect 1 1\nextrude 1\ntranslate 0.5 0 0\nrect 1 1\nextrude 1\nunion\n");
  const auto r = exec::execute(p, 128);
  REQUIRE(std::holds_alternative<VoxelSolid>(r));
  CHECK(std::fabs(std::get<VoxelSolid>(r).volume() - 1.5) / 1.5 < 0.02);
}

TEST_CASE("translate covariance: prefix shifts occupancy, bit pattern unchanged") {
  const VoxelSolid base = testutil::solid_of("rect 1.5 1\nextrude 0.8\n", 64);
  const VoxelSolid moved =
      testutil::solid_of("translate 2 -1 0.5\nrect 1.5 1\nextrude 0.8\n", 64);
  CHECK(moved.occupancy_equal(base));
  CHECK(moved.cell_size() == base.cell_size());
  CHECK(moved.origin().x == doctest::Approx(base.origin().x + 2.0).epsilon(1e-12));
  CHECK(moved.origin().y == doctest::Approx(base.origin().y - 1.0).epsilon(1e-12));
  CHECK(moved.origin().z == doctest::Approx(base.origin().z + 0.5).epsilon(1e-12));
}

TEST_CASE("determinism: execution is bit-identical across runs and thread counts") {
  const auto p = testutil::program_of(
      "circle 2\nextrude 0.5\nplane XY 0\nrect 0.5 0.5\nextrude 0.5\ncut\n");
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto r1 = exec::execute(p, 64);
  omp_set_num_threads(6);
  const auto r2 = exec::execute(p, 64);
  omp_set_num_threads(saved);
  const auto r3 = exec::execute(p, 64);
  REQUIRE(std::holds_alternative<VoxelSolid>(r1));
  CHECK(std::get<VoxelSolid>(r1).occupancy_equal(std::get<VoxelSolid>(r2)));
  CHECK(std::get<VoxelSolid>(r1).content_hash() == std::get<VoxelSolid>(r3).content_hash());
}

TEST_CASE("resolution convergence on the fixed 10-program suite") {
  // |V(128) - V(64)| / V(128) <= 0.05; the suite spans 1 to 5 operations and
  // every boolean kind.
  const char* suite[10] = {"cube_unit", "cylinder",    "plate",   "bracket", "pipe",
                           "ball_ish",  "chiral_steps", "h_beam", "steps_wide",
                           "capped_pipe"};
  for (const char* name : suite) {
    const auto text =
        dataset::read_file(std::string(GF_FIXTURES_DIR) + "/" + name + ".gcad");
    REQUIRE(text.has_value());
    const auto p = testutil::program_of(*text);
    const auto lo = exec::execute(p, 64);
    const auto hi = exec::execute(p, 128);
    REQUIRE(std::holds_alternative<VoxelSolid>(lo));
    REQUIRE(std::holds_alternative<VoxelSolid>(hi));
    const double v64 = std::get<VoxelSolid>(lo).volume();
    const double v128 = std::get<VoxelSolid>(hi).volume();
    INFO(name);
    CHECK(std::fabs(v128 - v64) / v128 <= 0.05);
  }
}

TEST_CASE("every fixture parses and executes to a non-empty solid") {
  dataset::LoadError error;
  const auto gt_set = dataset::load_gt_dir(GF_FIXTURES_DIR, &error);
  REQUIRE_MESSAGE(gt_set.has_value(), error.message);
  CHECK(gt_set->size() == 50);
  for (const auto& gt : *gt_set) {
    const auto r = exec::execute(gt.program, 64);
    REQUIRE_MESSAGE(std::holds_alternative<VoxelSolid>(r), "fixture " << gt.input_id);
    CHECK(std::get<VoxelSolid>(r).volume() > 0.0);
    const auto profile = dsl::complexity(gt.program);
    CHECK(profile.op_count >= 1);
    CHECK(profile.op_count <= 6);
  }
}

TEST_CASE("RLE debug dump round-trips occupancy") {
  const VoxelSolid s = testutil::solid_of("circle 1\nextrude 2\n", 64);
  std::stringstream buf;
  s.dump_rle(buf);
  const auto loaded = VoxelSolid::load_rle(buf);
  REQUIRE(loaded.has_value());
  CHECK(loaded->occupancy_equal(s));
  CHECK(loaded->occupied_cells() == s.occupied_cells());

  std::stringstream bad("GARBAGE0");
  CHECK_FALSE(VoxelSolid::load_rle(bad).has_value());
}

TEST_CASE("occupied bounds keep a margin inside the grid") {
  const VoxelSolid s = testutil::solid_of("rect 2 1\nextrude 3\n", 64);
  const auto b = s.occupied_bounds();
  REQUIRE(b.has_value());
  CHECK((*b)[0] >= 1);
  CHECK((*b)[3] <= s.resolution() - 2);
  CHECK((*b)[2] >= 1);
  CHECK((*b)[5] <= s.resolution() - 2);
}
