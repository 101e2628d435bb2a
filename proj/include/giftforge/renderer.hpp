#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <variant>
#include <vector>

#include "giftforge/kernels.hpp"
#include "giftforge/voxel.hpp"

namespace gf::render {

enum class Mode { Silhouette, DepthShaded };

struct RenderSpec {
  int width = 256;
  int height = 256;
  Vec3 view{1.0, 1.0, 1.0};  // normalized internally
  Mode mode = Mode::DepthShaded;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top
};

struct EmptySolid {};

using RenderResult = std::variant<Image, EmptySolid>;

// Deterministic orthographic framing: the occupied box is projected onto the
// screen basis and fitted with a 5% margin. Exposed so callers can relate
// pixel counts back to mm.
kernels::OrthoCamera compute_camera(const VoxelSolid& s, const RenderSpec& spec);

// Orthographic projection along spec.view. SILHOUETTE writes 255 on hits;
// DEPTH_SHADED maps hit distance linearly onto [32, 255] with the nearest
// surface brightest. Background is 0. Output bytes are identical across runs
// and worker counts.
RenderResult render(const VoxelSolid& s, const RenderSpec& spec);

// Binary PGM (P5, maxval 255).
void write_pgm(const Image& img, std::ostream& out);
bool write_pgm_file(const Image& img, const std::filesystem::path& path);

// 8-bit grayscale PNG for viewers that cannot read PGM.
bool write_png_file(const Image& img, const std::filesystem::path& path);

}  // namespace gf::render
