#include <doctest.h>

#include <cmath>

#include "giftforge/dataset.hpp"
#include "giftforge/executor.hpp"
#include "giftforge/geometry.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace gf;

namespace {

VoxelSolid cube(double side, int res = 64) {
  return testutil::solid_of("rect " + dsl::format_number(side) + " " +
                                dsl::format_number(side) + "\nextrude " +
                                dsl::format_number(side) + "\n",
                            res);
}

double iou_best_score(const VoxelSolid& a, const VoxelSolid& b, int res = 64,
                      int orientations = 24) {
  const auto r = geom::iou_best(a, b, res, orientations);
  REQUIRE(std::holds_alternative<geom::IouBestResult>(r));
  return std::get<geom::IouBestResult>(r).score;
}

}  // namespace

TEST_CASE("unit cube inertia matches the analytic 1/6 diagonal within 1%") {
  const auto r = geom::inertia(cube(1.0));
  REQUIRE(std::holds_alternative<geom::InertiaSummary>(r));
  const auto& info = std::get<geom::InertiaSummary>(r);
  const auto expected = oracle::box_inertia_diag(1, 1, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::fabs(info.tensor.m[i][i] - expected[i]) / expected[i] < 0.01);
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::fabs(info.tensor.m[i][j]) < 1e-3);
  }
  CHECK(info.trace == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("translation moves the centroid but not the tensor") {
  const VoxelSolid base = cube(1.0);
  const VoxelSolid moved = testutil::solid_of(
      "translate 3 -2 1\nrect 1 1\nextrude 1\n", 64);
  const auto ra = geom::inertia(base);
  const auto rb = geom::inertia(moved);
  const auto& a = std::get<geom::InertiaSummary>(ra);
  const auto& b = std::get<geom::InertiaSummary>(rb);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(a.tensor.m[i][j] == doctest::Approx(b.tensor.m[i][j]).epsilon(1e-9));
  CHECK(b.centroid.x - a.centroid.x == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(b.centroid.y - a.centroid.y == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("2x1x1 box: smallest eigenvalue's axis is the long axis") {
  const VoxelSolid box = testutil::solid_of("rect 2 1\nextrude 1\n", 64);
  const auto r = geom::inertia(box);
  const auto& info = std::get<geom::InertiaSummary>(r);
  const auto expected = oracle::box_inertia_diag(2, 1, 1);
  // ascending eigenvalues: (1/6, 5/12, 5/12)
  CHECK(info.eigenvalues[0] == doctest::Approx(expected[0]).epsilon(0.02));
  CHECK(info.eigenvalues[1] == doctest::Approx(expected[1]).epsilon(0.02));
  CHECK(info.eigenvalues[0] < info.eigenvalues[1]);
  const Vec3 axis = info.eigenvectors.col(0);
  CHECK(std::fabs(axis.x) > 0.99);  // long axis is x
}

TEST_CASE("jacobi: reconstruction residual is tiny on random symmetric matrices") {
  Prng rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) a.m[i][j] = a.m[j][i] = (rng.next_unit() - 0.5) * 10.0;
    const auto eig = geom::jacobi_eigen_sym3(a);

    Mat3 lambda;
    for (int i = 0; i < 3; ++i) lambda.m[i][i] = eig.values[i];
    const Mat3 rebuilt = eig.vectors * lambda * eig.vectors.transposed();
    double diff = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) diff += std::pow(rebuilt.m[i][j] - a.m[i][j], 2);
    CHECK(std::sqrt(diff) <= 1e-8 * a.frobenius());
    CHECK(eig.vectors.det() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eig.values[0] <= eig.values[1]);
    CHECK(eig.values[1] <= eig.values[2]);
  }
}

TEST_CASE("degenerate tensors are reported") {
  // A perfectly planar synthetic tensor: eigenvalue ratio below 1e-9.
  VoxelSolid sheet(16, {0, 0, 0}, 0.1);
  (void)sheet;
  Mat3 t;
  t.m = {{{1.0, 0, 0}, {0, 1.0, 0}, {0, 0, 1e-12}}};
  const auto eig = geom::jacobi_eigen_sym3(t);
  CHECK(eig.values[0] < 1e-9 * eig.values[2]);
}

TEST_CASE("normalize: centroid lands at the grid center, trace at 3.0") {
  for (const char* name : {"lshape", "cylinder", "steps"}) {
    const auto text = dataset::read_file(std::string(GF_FIXTURES_DIR) + "/" + name + ".gcad");
    REQUIRE(text.has_value());
    const VoxelSolid s = testutil::solid_of(*text, 64);
    const auto r = geom::normalize(s, 64);
    REQUIRE(std::holds_alternative<geom::NormalizedSolid>(r));
    const auto& n = std::get<geom::NormalizedSolid>(r);

    const auto check = geom::inertia(n.grid);
    REQUIRE(std::holds_alternative<geom::InertiaSummary>(check));
    const auto& info = std::get<geom::InertiaSummary>(check);
    const double half_cell = n.grid.cell_size() * 0.5;
    CHECK(std::fabs(info.centroid.x) <= half_cell);
    CHECK(std::fabs(info.centroid.y) <= half_cell);
    CHECK(std::fabs(info.centroid.z) <= half_cell);
    CHECK(std::fabs(info.trace - geom::kTraceTarget) / geom::kTraceTarget <= 0.02);
  }
}

TEST_CASE("voxel_iou: identity, disjoint, grid mismatch") {
  const VoxelSolid a = cube(1.0);
  CHECK(*geom::voxel_iou(a, a) == 1.0);

  VoxelSolid b(a.resolution(), a.origin(), a.cell_size());
  const auto bounds = *a.occupied_bounds();
  b.set(bounds[0], bounds[1], bounds[2], true);  // overlaps a in one cell
  const double expected = 1.0 / static_cast<double>(a.occupied_cells());
  CHECK(*geom::voxel_iou(a, b) == doctest::Approx(expected).epsilon(1e-12));

  VoxelSolid off_grid(a.resolution(), a.origin() + Vec3{0.1, 0, 0}, a.cell_size());
  CHECK_FALSE(geom::voxel_iou(a, off_grid).has_value());

  // exact symmetry
  CHECK(*geom::voxel_iou(b, a) == *geom::voxel_iou(a, b));
}

TEST_CASE("offset unit cubes: voxel IoU within 0.02 of 1/3 at R=128, matches oracle") {
  const int res = 128;
  VoxelSolid grid_a(res, {-0.25, -0.5, -0.5}, 2.0 / res);
  VoxelSolid grid_b(res, {-0.25, -0.5, -0.5}, 2.0 / res);
  kernels::fill(grid_a, [](const Vec3& p) {
    return p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1 && p.z >= 0 && p.z <= 1;
  });
  kernels::fill(grid_b, [](const Vec3& p) {
    return p.x >= 0.5 && p.x <= 1.5 && p.y >= 0 && p.y <= 1 && p.z >= 0 && p.z <= 1;
  });
  const double iou = *geom::voxel_iou(grid_a, grid_b);
  CHECK(std::fabs(iou - 1.0 / 3.0) <= 0.02);
  CHECK(iou == doctest::Approx(oracle::voxel_iou_bruteforce(grid_a, grid_b)).epsilon(1e-12));
  CHECK(oracle::offset_cube_iou(res) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("iou_best: self-score is at least 0.98") {
  for (const char* name : {"cube_unit", "lshape", "washer"}) {
    const auto text = dataset::read_file(std::string(GF_FIXTURES_DIR) + "/" + name + ".gcad");
    const VoxelSolid s = testutil::solid_of(*text, 64);
    CHECK(iou_best_score(s, s) >= 0.98);
  }
}

TEST_CASE("iou_best: scale invariance for sides 1 and 2") {
  CHECK(iou_best_score(cube(1.0), cube(2.0)) >= 0.98);
}

TEST_CASE("iou_best: scale invariance for factors 0.5, 2, 4") {
  const auto text = dataset::read_file(std::string(GF_FIXTURES_DIR) + "/lshape.gcad");
  const VoxelSolid base = testutil::solid_of(*text, 64);
  for (double k : {0.5, 2.0, 4.0}) {
    // Scale by rewriting the program's literals.
    auto program = testutil::program_of(*text);
    for (auto& st : program.statements) {
      const std::size_t first = st.op == dsl::Opcode::Plane ? 1 : 0;
      for (std::size_t i = first; i < st.args.size(); ++i) st.args[i] *= k;
    }
    const auto scaled = exec::execute(program, 64);
    REQUIRE(std::holds_alternative<VoxelSolid>(scaled));
    CHECK(iou_best_score(std::get<VoxelSolid>(scaled), base) >= 0.95);
  }
}

TEST_CASE("iou_best: invariance under all 24 grid rotations within 0.05") {
  const auto text = dataset::read_file(std::string(GF_FIXTURES_DIR) + "/lshape.gcad");
  const VoxelSolid a = testutil::solid_of(*text, 64);
  const VoxelSolid b = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/steps.gcad"), 64);
  const double reference = iou_best_score(a, b);
  for (const auto& rot : geom::cube_rotations()) {
    const VoxelSolid rotated = kernels::rotate_cubic(a, rot);
    CHECK(std::fabs(iou_best_score(rotated, b) - reference) <= 0.05);
  }
}

TEST_CASE("iou_best: symmetry within 0.05") {
  const VoxelSolid a = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/lshape.gcad"), 64);
  const VoxelSolid b = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/cross.gcad"), 64);
  CHECK(std::fabs(iou_best_score(a, b) - iou_best_score(b, a)) <= 0.05);
}

TEST_CASE("iou_best: L-shape against its 90-degree rotation scores at least 0.95") {
  const VoxelSolid l = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/lshape.gcad"), 64);
  kernels::SignedPerm rot_z;  // 90 degrees about z
  rot_z.perm = {1, 0, 2};
  rot_z.sign = {-1, 1, 1};
  REQUIRE(rot_z.determinant() == 1);
  const VoxelSolid rotated = kernels::rotate_cubic(l, rot_z);
  CHECK(iou_best_score(rotated, l) >= 0.95);
}

TEST_CASE("iou_best: octahedrally symmetric solid survives any cube rotation") {
  const VoxelSolid ball = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/ball_ish.gcad"), 64);
  for (int i : {3, 9, 17, 23}) {
    const VoxelSolid rotated = kernels::rotate_cubic(ball, geom::cube_rotations()[i]);
    CHECK(iou_best_score(rotated, ball) >= 0.95);
  }
}

TEST_CASE("chirality: reflections are excluded from the 24-set, exposed by the 48-set") {
  const VoxelSolid s = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/chiral_steps.gcad"), 64);
  kernels::SignedPerm flip;
  flip.sign = {-1, 1, 1};
  const VoxelSolid mirrored = kernels::rotate_cubic(s, flip);
  const double with_24 = iou_best_score(mirrored, s, 64, 24);
  const double with_48 = iou_best_score(mirrored, s, 64, 48);
  CHECK(with_48 >= with_24);
  CHECK(with_48 >= 0.95);   // the mirror is in the 48-set
  CHECK(with_24 < 0.95);    // but not reachable by proper rotations
}

TEST_CASE("rotation sets match the independently generated groups") {
  CHECK(geom::cube_rotations().size() == oracle::rotation_group_24().size());
  CHECK(geom::cube_orientations48().size() == oracle::orientation_group_48().size());
  // every SignedPerm matrix appears in the closure-generated group
  for (const auto& sp : geom::cube_rotations()) {
    const Mat3 m = sp.matrix();
    bool found = false;
    for (const auto& g : oracle::rotation_group_24()) {
      bool equal = true;
      for (int i = 0; i < 3 && equal; ++i)
        for (int j = 0; j < 3 && equal; ++j)
          if (std::lround(g.m[i][j]) != std::lround(m.m[i][j])) equal = false;
      if (equal) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("iou_best search agrees with the exhaustive float-rotation oracle") {
  const VoxelSolid l = testutil::solid_of(
      *dataset::read_file(std::string(GF_FIXTURES_DIR) + "/lshape.gcad"), 48);
  const auto na = geom::normalize(l, 48);
  REQUIRE(std::holds_alternative<geom::NormalizedSolid>(na));
  const VoxelSolid& grid = std::get<geom::NormalizedSolid>(na).grid;

  // Self-comparison on the normalized grid: both paths must find the same max.
  double best_impl = -1.0;
  for (const auto& rot : geom::cube_rotations()) {
    const VoxelSolid rotated = kernels::rotate_cubic(grid, rot);
    const auto counts = kernels::overlap(rotated, grid);
    best_impl = std::max(best_impl, static_cast<double>(counts.intersection) /
                                        static_cast<double>(counts.union_count));
  }
  const double best_oracle =
      oracle::iou_best_exhaustive(grid, grid, oracle::rotation_group_24());
  CHECK(best_impl == doctest::Approx(best_oracle).epsilon(0.02));
  CHECK(best_impl == 1.0);
}
