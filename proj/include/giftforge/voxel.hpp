#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "giftforge/geom3.hpp"

namespace gf {

// Cubic occupancy grid. Cell (x,y,z) spans
// [origin + i*h, origin + (i+1)*h) per axis with h = cell_size; its center is
// origin + (i + 0.5)*h.
class VoxelSolid {
 public:
  VoxelSolid() = default;
  VoxelSolid(int resolution, const Vec3& origin, double cell_size);

  int resolution() const { return res_; }
  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_; }
  bool empty() const { return occupied_ == 0; }
  std::int64_t occupied_cells() const { return occupied_; }
  double volume() const { return static_cast<double>(occupied_) * cell_ * cell_ * cell_; }

  bool get(int x, int y, int z) const {
    const std::size_t idx = cell_index(x, y, z);
    return (bits_[idx >> 6] >> (idx & 63)) & 1u;
  }
  void set(int x, int y, int z, bool v);

  Vec3 cell_center(int x, int y, int z) const {
    return {origin_.x + (x + 0.5) * cell_, origin_.y + (y + 0.5) * cell_,
            origin_.z + (z + 0.5) * cell_};
  }

  // Occupancy of the cell containing a world point; false outside the grid.
  bool sample(const Vec3& p) const;

  bool same_grid(const VoxelSolid& o) const {
    return res_ == o.res_ && cell_ == o.cell_ && origin_.x == o.origin_.x &&
           origin_.y == o.origin_.y && origin_.z == o.origin_.z;
  }
  bool occupancy_equal(const VoxelSolid& o) const {
    return res_ == o.res_ && bits_ == o.bits_;
  }

  // Inclusive occupied index bounds {x0,y0,z0,x1,y1,z1}; nullopt when empty.
  std::optional<std::array<int, 6>> occupied_bounds() const;
  // World-space box covering the full extents of the occupied cells.
  std::optional<Aabb> occupied_aabb() const;

  std::span<const std::uint64_t> words() const { return bits_; }
  std::span<std::uint64_t> words() { return bits_; }
  // Recompute the cached occupied count after direct word writes.
  void recount();

  std::uint64_t content_hash() const;

  // Debug RLE dump: magic "GFVOX001", little-endian u32 resolution and run
  // count, then (value, length) u32 pairs in x-fastest cell order.
  void dump_rle(std::ostream& out) const;
  static std::optional<VoxelSolid> load_rle(std::istream& in);

  std::size_t cell_index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * res_ + y) * res_ + x;
  }

 private:
  int res_ = 0;
  Vec3 origin_{};
  double cell_ = 0.0;
  std::vector<std::uint64_t> bits_;
  std::int64_t occupied_ = 0;
};

// Cubic grid fitted around `content`: side = resolution * h with
// h = max_side / (resolution - 2), centered on the content, which leaves at
// least one empty cell of margin on every face.
VoxelSolid make_fitted_grid(const Aabb& content, int resolution);

}  // namespace gf
