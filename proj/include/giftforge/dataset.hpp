#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "giftforge/augmentor.hpp"
#include "giftforge/dsl.hpp"

namespace gf::dataset {

// Loads the ground-truth corpus: every .gcad file in the directory, sorted by
// filename; input_id is the stem. A sibling <stem>.pgm or <stem>.png becomes
// the input image ref; otherwise the ref is empty and the caller renders one.
struct LoadError {
  std::string message;
};

std::optional<std::vector<augment::GtEntry>> load_gt_dir(const std::filesystem::path& dir,
                                                         LoadError* error);

std::optional<std::string> read_file(const std::filesystem::path& path);
bool write_file(const std::filesystem::path& path, const std::string& content);

std::uint64_t file_content_hash(const std::filesystem::path& path);
std::string hash_hex(std::uint64_t h);

}  // namespace gf::dataset
