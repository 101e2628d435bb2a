// Serial reference vs OpenMP kernels on the hot paths: primitive fill,
// boolean combine, overlap counting, grid rotation, raycasting, and the
// end-to-end orientation search.
//
// Run: ./bench_kernels [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "giftforge/dsl.hpp"
#include "giftforge/executor.hpp"
#include "giftforge/geometry.hpp"
#include "giftforge/kernels.hpp"
#include "giftforge/renderer.hpp"

namespace {

using namespace gf;

VoxelSolid make_shape(int res) {
  const char* text =
      "plane XY 0\nrect 3 1\nextrude 1\nplane XY 0\nrect 1 3\nextrude 1\nunion\n";
  const auto parsed = dsl::parse(text);
  auto executed = exec::execute(std::get<dsl::CadProgram>(parsed), res);
  return std::get<VoxelSolid>(executed);
}

auto sphere_pred(const VoxelSolid& grid) {
  const Vec3 c = grid.cell_center(grid.resolution() / 2, grid.resolution() / 2,
                                  grid.resolution() / 2);
  const double r = grid.resolution() * grid.cell_size() * 0.35;
  return [c, r](const Vec3& p) { return (p - c).dot(p - c) <= r * r; };
}

void fill_serial(benchmark::State& state) {
  VoxelSolid grid(static_cast<int>(state.range(0)), {0, 0, 0}, 0.02);
  for (auto _ : state) {
    kernels::serial::fill(grid, sphere_pred(grid));
    benchmark::DoNotOptimize(grid.occupied_cells());
  }
}

void fill_omp(benchmark::State& state) {
  VoxelSolid grid(static_cast<int>(state.range(0)), {0, 0, 0}, 0.02);
  for (auto _ : state) {
    kernels::fill(grid, sphere_pred(grid));
    benchmark::DoNotOptimize(grid.occupied_cells());
  }
}

void combine_serial(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const VoxelSolid a = make_shape(res);
  VoxelSolid out(res, a.origin(), a.cell_size());
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::serial::combine(out, a, a, kernels::BoolOp::Union));
}

void combine_omp(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const VoxelSolid a = make_shape(res);
  VoxelSolid out(res, a.origin(), a.cell_size());
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::combine(out, a, a, kernels::BoolOp::Union));
}

void overlap_serial(benchmark::State& state) {
  const VoxelSolid a = make_shape(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::overlap(a, a));
}

void overlap_omp(benchmark::State& state) {
  const VoxelSolid a = make_shape(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::overlap(a, a));
}

void rotate_serial(benchmark::State& state) {
  const VoxelSolid a = make_shape(static_cast<int>(state.range(0)));
  kernels::SignedPerm rot;
  rot.perm = {1, 2, 0};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::rotate_cubic(a, rot));
}

void rotate_omp(benchmark::State& state) {
  const VoxelSolid a = make_shape(static_cast<int>(state.range(0)));
  kernels::SignedPerm rot;
  rot.perm = {1, 2, 0};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rotate_cubic(a, rot));
}

void raycast_serial(benchmark::State& state) {
  const VoxelSolid a = make_shape(64);
  const auto cam = render::compute_camera(a, {});
  std::vector<double> depth(256 * 256);
  for (auto _ : state) {
    kernels::serial::raycast(a, cam, 256, 256, depth);
    benchmark::DoNotOptimize(depth.data());
  }
}

void raycast_omp(benchmark::State& state) {
  const VoxelSolid a = make_shape(64);
  const auto cam = render::compute_camera(a, {});
  std::vector<double> depth(256 * 256);
  for (auto _ : state) {
    kernels::raycast(a, cam, 256, 256, depth);
    benchmark::DoNotOptimize(depth.data());
  }
}

void iou_best_end_to_end(benchmark::State& state) {
  const VoxelSolid a = make_shape(static_cast<int>(state.range(0)));
  const VoxelSolid b = make_shape(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(geom::iou_best(a, b, a.resolution(), 24));
}

}  // namespace

BENCHMARK(fill_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(fill_omp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(combine_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(combine_omp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(overlap_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(overlap_omp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(rotate_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(rotate_omp)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(raycast_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(raycast_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(iou_best_end_to_end)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
