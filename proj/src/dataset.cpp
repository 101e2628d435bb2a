#include "giftforge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "giftforge/rng.hpp"

namespace gf::dataset {

namespace fs = std::filesystem;

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  return static_cast<bool>(out);
}

std::uint64_t file_content_hash(const fs::path& path) {
  const auto content = read_file(path);
  return content ? fnv1a64(*content) : 0;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

std::optional<std::vector<augment::GtEntry>> load_gt_dir(const fs::path& dir, LoadError* error) {
  if (!fs::is_directory(dir)) {
    if (error) error->message = "ground-truth directory does not exist: " + dir.string();
    return std::nullopt;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".gcad")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    if (error) error->message = "no .gcad files in " + dir.string();
    return std::nullopt;
  }

  std::vector<augment::GtEntry> out;
  for (const fs::path& path : files) {
    const auto text = read_file(path);
    if (!text) {
      if (error) error->message = "cannot read " + path.string();
      return std::nullopt;
    }
    const dsl::ParseResult parsed = dsl::parse(*text);
    if (std::holds_alternative<dsl::ParseError>(parsed)) {
      const auto& pe = std::get<dsl::ParseError>(parsed);
      if (error)
        error->message = path.string() + ":" + std::to_string(pe.line) + ":" +
                         std::to_string(pe.column) + ": " + pe.message;
      return std::nullopt;
    }

    augment::GtEntry entry;
    entry.input_id = path.stem().string();
    entry.program_text = *text;
    entry.program = std::get<dsl::CadProgram>(parsed);
    entry.canonical_text = dsl::serialize(entry.program);
    for (const char* ext : {".pgm", ".png"}) {
      fs::path image = path;
      image.replace_extension(ext);
      if (fs::exists(image)) {
        entry.image_ref = image.generic_string();
        break;
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace gf::dataset
