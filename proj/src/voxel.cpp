#include "giftforge/voxel.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "giftforge/rng.hpp"

namespace gf {

VoxelSolid::VoxelSolid(int resolution, const Vec3& origin, double cell_size)
    : res_(resolution), origin_(origin), cell_(cell_size) {
  const std::size_t cells = static_cast<std::size_t>(res_) * res_ * res_;
  bits_.assign((cells + 63) / 64, 0);
}

void VoxelSolid::set(int x, int y, int z, bool v) {
  const std::size_t idx = cell_index(x, y, z);
  std::uint64_t& word = bits_[idx >> 6];
  const std::uint64_t mask = 1ULL << (idx & 63);
  const bool old = word & mask;
  if (old == v) return;
  if (v) {
    word |= mask;
    ++occupied_;
  } else {
    word &= ~mask;
    --occupied_;
  }
}

bool VoxelSolid::sample(const Vec3& p) const {
  const double fx = (p.x - origin_.x) / cell_;
  const double fy = (p.y - origin_.y) / cell_;
  const double fz = (p.z - origin_.z) / cell_;
  if (fx < 0.0 || fy < 0.0 || fz < 0.0) return false;
  const int x = static_cast<int>(fx);
  const int y = static_cast<int>(fy);
  const int z = static_cast<int>(fz);
  if (x >= res_ || y >= res_ || z >= res_) return false;
  return get(x, y, z);
}

void VoxelSolid::recount() {
  std::int64_t n = 0;
  for (std::uint64_t w : bits_) n += std::popcount(w);
  occupied_ = n;
}

std::optional<std::array<int, 6>> VoxelSolid::occupied_bounds() const {
  if (occupied_ == 0) return std::nullopt;
  std::array<int, 6> b = {res_, res_, res_, -1, -1, -1};
  for (int z = 0; z < res_; ++z)
    for (int y = 0; y < res_; ++y)
      for (int x = 0; x < res_; ++x)
        if (get(x, y, z)) {
          b[0] = std::min(b[0], x);
          b[1] = std::min(b[1], y);
          b[2] = std::min(b[2], z);
          b[3] = std::max(b[3], x);
          b[4] = std::max(b[4], y);
          b[5] = std::max(b[5], z);
        }
  return b;
}

std::optional<Aabb> VoxelSolid::occupied_aabb() const {
  const auto b = occupied_bounds();
  if (!b) return std::nullopt;
  return Aabb{{origin_.x + (*b)[0] * cell_, origin_.y + (*b)[1] * cell_,
               origin_.z + (*b)[2] * cell_},
              {origin_.x + ((*b)[3] + 1) * cell_, origin_.y + ((*b)[4] + 1) * cell_,
               origin_.z + ((*b)[5] + 1) * cell_}};
}

std::uint64_t VoxelSolid::content_hash() const {
  std::uint64_t h = fnv1a64("gfvox");
  auto mix_double = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = mix_hash(h, bits);
  };
  h = mix_hash(h, static_cast<std::uint64_t>(res_));
  mix_double(origin_.x);
  mix_double(origin_.y);
  mix_double(origin_.z);
  mix_double(cell_);
  for (std::uint64_t w : bits_) h = mix_hash(h, w);
  return h;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::optional<std::uint32_t> get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return std::nullopt;
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr char kMagic[8] = {'G', 'F', 'V', 'O', 'X', '0', '0', '1'};

}  // namespace

void VoxelSolid::dump_rle(std::ostream& out) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
  const std::size_t cells = static_cast<std::size_t>(res_) * res_ * res_;
  std::uint32_t value = 0;
  std::uint32_t length = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const std::uint32_t v = (bits_[i >> 6] >> (i & 63)) & 1u;
    if (v == value && length > 0) {
      ++length;
    } else {
      if (length > 0) runs.emplace_back(value, length);
      value = v;
      length = 1;
    }
  }
  if (length > 0) runs.emplace_back(value, length);

  out.write(kMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(res_));
  put_u32(out, static_cast<std::uint32_t>(runs.size()));
  for (const auto& [v, len] : runs) {
    put_u32(out, v);
    put_u32(out, len);
  }
}

std::optional<VoxelSolid> VoxelSolid::load_rle(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
  const auto res = get_u32(in);
  const auto run_count = get_u32(in);
  if (!res || !run_count || *res == 0) return std::nullopt;
  VoxelSolid s(static_cast<int>(*res), Vec3{}, 1.0);
  const std::size_t cells = static_cast<std::size_t>(*res) * *res * *res;
  std::size_t pos = 0;
  for (std::uint32_t r = 0; r < *run_count; ++r) {
    const auto value = get_u32(in);
    const auto length = get_u32(in);
    if (!value || !length || pos + *length > cells) return std::nullopt;
    if (*value) {
      for (std::uint32_t i = 0; i < *length; ++i) {
        const std::size_t idx = pos + i;
        s.bits_[idx >> 6] |= 1ULL << (idx & 63);
      }
    }
    pos += *length;
  }
  if (pos != cells) return std::nullopt;
  s.recount();
  return s;
}

VoxelSolid make_fitted_grid(const Aabb& content, int resolution) {
  const double max_side = content.max_side();
  const double h = max_side / (resolution - 2);
  const double side = resolution * h;
  const Vec3 center = content.center();
  const Vec3 origin = {center.x - side / 2, center.y - side / 2, center.z - side / 2};
  return VoxelSolid(resolution, origin, h);
}

}  // namespace gf
