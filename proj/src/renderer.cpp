#include "giftforge/renderer.hpp"

#include <zlib.h>

#include <cmath>
#include <fstream>
#include <limits>

namespace gf::render {

kernels::OrthoCamera compute_camera(const VoxelSolid& s, const RenderSpec& spec) {
  kernels::OrthoCamera cam;
  cam.dir = spec.view.normalized();
  Vec3 up_hint{0.0, 0.0, 1.0};
  if (std::fabs(cam.dir.dot(up_hint)) > 0.99) up_hint = {0.0, 1.0, 0.0};
  cam.right = up_hint.cross(cam.dir).normalized();
  cam.up = cam.dir.cross(cam.right);

  const auto box = s.occupied_aabb();
  const Aabb content = box ? *box : Aabb{{0, 0, 0}, {1, 1, 1}};
  cam.center = content.center();

  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  double vmin = umin, vmax = -umin;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 p = {(corner & 1) ? content.hi.x : content.lo.x,
                    (corner & 2) ? content.hi.y : content.lo.y,
                    (corner & 4) ? content.hi.z : content.lo.z};
    const Vec3 rel = p - cam.center;
    const double u = rel.dot(cam.right);
    const double v = rel.dot(cam.up);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double extent = std::max(umax - umin, vmax - vmin) * 1.05;
  cam.mm_per_px = extent / std::min(spec.width, spec.height);
  return cam;
}

RenderResult render(const VoxelSolid& s, const RenderSpec& spec) {
  if (s.empty()) return EmptySolid{};
  const kernels::OrthoCamera cam = compute_camera(s, spec);
  const std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;
  std::vector<double> depth(n);
  kernels::raycast(s, cam, spec.width, spec.height, depth);

  Image img;
  img.width = spec.width;
  img.height = spec.height;
  img.pixels.assign(n, 0);

  if (spec.mode == Mode::Silhouette) {
    for (std::size_t i = 0; i < n; ++i)
      if (depth[i] != kernels::kRayMiss) img.pixels[i] = 255;
    return img;
  }

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : dmin) reduction(max : dmax)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    if (depth[i] == kernels::kRayMiss) continue;
    dmin = std::min(dmin, depth[i]);
    dmax = std::max(dmax, depth[i]);
  }
  const double range = dmax - dmin;
  for (std::size_t i = 0; i < n; ++i) {
    if (depth[i] == kernels::kRayMiss) continue;
    const double t = range > 0.0 ? (depth[i] - dmin) / range : 0.0;
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 - t * 223.0));
  }
  return img;
}

void write_pgm(const Image& img, std::ostream& out) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

bool write_pgm_file(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  write_pgm(img, out);
  return static_cast<bool>(out);
}

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

void put_chunk(std::ostream& out, const char type[4], const std::string& payload) {
  std::string buf;
  put_u32_be(buf, static_cast<std::uint32_t>(payload.size()));
  buf.append(type, 4);
  buf += payload;
  const std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(buf.data() + 4), static_cast<uInt>(buf.size() - 4)));
  put_u32_be(buf, crc);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace

bool write_png_file(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;

  static const unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(kSignature), 8);

  std::string ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.width));
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr += '\x08';              // bit depth
  ihdr += '\x00';              // grayscale
  ihdr.append(3, '\x00');      // compression, filter, interlace
  put_chunk(out, "IHDR", ihdr);

  // Raw scanlines with filter byte 0.
  std::string raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (img.width + 1));
  for (int y = 0; y < img.height; ++y) {
    raw += '\x00';
    raw.append(reinterpret_cast<const char*>(img.pixels.data() +
                                             static_cast<std::size_t>(y) * img.width),
               img.width);
  }
  uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(compressed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &compressed_size,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    return false;
  compressed.resize(compressed_size);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", "");
  return static_cast<bool>(out);
}

}  // namespace gf::render
