#include <doctest.h>

#include <omp.h>
#include <zlib.h>

#include <cmath>
#include <sstream>

#include "giftforge/dataset.hpp"
#include "giftforge/renderer.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace gf;

TEST_CASE("cube silhouette: hexagon pixel count within 3% of the analytic area") {
  const VoxelSolid cube = testutil::solid_of("rect 1 1\nextrude 1\n", 64);
  render::RenderSpec spec;
  spec.mode = render::Mode::Silhouette;
  const auto cam = render::compute_camera(cube, spec);
  const auto result = render::render(cube, spec);
  REQUIRE(std::holds_alternative<render::Image>(result));
  const auto& img = std::get<render::Image>(result);

  long foreground = 0;
  for (std::uint8_t px : img.pixels) foreground += px > 0;
  const double expected =
      oracle::cube_isometric_area(1.0) / (cam.mm_per_px * cam.mm_per_px);
  CHECK(std::fabs(foreground - expected) / expected < 0.03);
}

TEST_CASE("rendering the same solid twice gives identical bytes") {
  const VoxelSolid s = testutil::solid_of("circle 1.2\nextrude 0.8\n", 64);
  render::RenderSpec spec;
  const auto a = render::render(s, spec);
  const auto b = render::render(s, spec);
  CHECK(std::get<render::Image>(a).pixels == std::get<render::Image>(b).pixels);
}

TEST_CASE("render bytes are identical across worker counts 1 and 8") {
  const VoxelSolid s = testutil::solid_of(
      "rect 3 1\nextrude 1\nrect 1 3\nextrude 1\nunion\n", 64);
  const int saved = omp_get_max_threads();
  render::RenderSpec spec;
  omp_set_num_threads(1);
  const auto a = render::render(s, spec);
  omp_set_num_threads(8);
  const auto b = render::render(s, spec);
  omp_set_num_threads(saved);
  CHECK(std::get<render::Image>(a).pixels == std::get<render::Image>(b).pixels);
}

TEST_CASE("empty solids are rejected") {
  VoxelSolid empty(32, {0, 0, 0}, 0.1);
  CHECK(std::holds_alternative<render::EmptySolid>(render::render(empty, {})));
}

TEST_CASE("depth shading stays inside [32, 255] with background 0") {
  const VoxelSolid s = testutil::solid_of("rect 2 1\nextrude 0.5\n", 64);
  const auto result = render::render(s, {});
  const auto& img = std::get<render::Image>(result);
  bool saw_foreground = false;
  for (std::uint8_t px : img.pixels) {
    if (px == 0) continue;
    saw_foreground = true;
    CHECK(px >= 32);
  }
  CHECK(saw_foreground);
}

TEST_CASE("monotone coverage: a superset solid has a superset silhouette") {
  const VoxelSolid small = testutil::solid_of("rect 1 1\nextrude 1\n", 64);
  VoxelSolid big(small.resolution(), small.origin(), small.cell_size());
  auto words_small = small.words();
  auto words_big = big.words();
  for (std::size_t i = 0; i < words_small.size(); ++i) words_big[i] = words_small[i];
  big.recount();
  const auto bounds = *small.occupied_bounds();
  for (int z = bounds[2]; z <= bounds[5]; ++z)
    for (int y = bounds[1]; y <= bounds[4]; ++y)
      big.set(std::min(bounds[3] + 1, big.resolution() - 1), y, z, true);

  render::RenderSpec spec;
  spec.mode = render::Mode::Silhouette;
  // Shared framing so pixels correspond; frame on the superset.
  const auto cam = render::compute_camera(big, spec);
  std::vector<double> d_small(spec.width * spec.height), d_big(spec.width * spec.height);
  kernels::raycast(small, cam, spec.width, spec.height, d_small);
  kernels::raycast(big, cam, spec.width, spec.height, d_big);
  for (std::size_t i = 0; i < d_small.size(); ++i)
    if (d_small[i] != kernels::kRayMiss) CHECK(d_big[i] != kernels::kRayMiss);
}

TEST_CASE("pgm output carries the P5 header and exact payload") {
  render::Image img;
  img.width = 3;
  img.height = 2;
  img.pixels = {0, 128, 255, 7, 0, 32};
  std::ostringstream out;
  render::write_pgm(img, out);
  const std::string bytes = out.str();
  CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n3 2\n255\n").size() + 6);
}

TEST_CASE("png export round-trips pixel data through zlib") {
  const VoxelSolid s = testutil::solid_of("rect 2 1\nextrude 0.5\n", 64);
  render::RenderSpec spec;
  spec.width = 64;
  spec.height = 64;
  const auto result = render::render(s, spec);
  const auto& img = std::get<render::Image>(result);

  testutil::TempDir dir("png");
  const auto path = dir.path / "out.png";
  REQUIRE(render::write_png_file(img, path));

  const auto bytes = *gf::dataset::read_file(path);
  REQUIRE(bytes.size() > 8);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x89);
  CHECK(bytes.substr(1, 3) == "PNG");

  // walk chunks, inflate IDAT, strip filter bytes
  std::string idat;
  std::size_t pos = 8;
  auto read_u32 = [&](std::size_t at) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 3]));
  };
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = read_u32(pos);
    const std::string type = bytes.substr(pos + 4, 4);
    if (type == "IHDR") {
      CHECK(read_u32(pos + 8) == 64);   // width
      CHECK(read_u32(pos + 12) == 64);  // height
    }
    if (type == "IDAT") idat += bytes.substr(pos + 8, len);
    pos += 12 + len;
  }
  REQUIRE_FALSE(idat.empty());
  std::vector<unsigned char> raw(64 * 65);
  uLongf raw_size = raw.size();
  REQUIRE(uncompress(raw.data(), &raw_size, reinterpret_cast<const Bytef*>(idat.data()),
                     static_cast<uLong>(idat.size())) == Z_OK);
  REQUIRE(raw_size == 64 * 65);
  for (int y = 0; y < 64; ++y) {
    CHECK(raw[y * 65] == 0);  // filter byte
    for (int x = 0; x < 64; ++x)
      CHECK(raw[y * 65 + 1 + x] == img.pixels[y * 64 + x]);
  }
}

TEST_CASE("render output depends on occupancy, not construction order") {
  const int res = 32;
  VoxelSolid a(res, {0, 0, 0}, 0.1);
  VoxelSolid b(res, {0, 0, 0}, 0.1);
  for (int z = 5; z < 20; ++z)
    for (int y = 5; y < 20; ++y)
      for (int x = 5; x < 20; ++x) a.set(x, y, z, true);
  for (int x = 19; x >= 5; --x)
    for (int y = 19; y >= 5; --y)
      for (int z = 19; z >= 5; --z) b.set(x, y, z, true);
  const auto ra = render::render(a, {});
  const auto rb = render::render(b, {});
  CHECK(std::get<render::Image>(ra).pixels == std::get<render::Image>(rb).pixels);
}
