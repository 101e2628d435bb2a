#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "giftforge/renderer.hpp"
#include "giftforge/sampler.hpp"
#include "giftforge/verifier.hpp"

namespace gf::augment {

// Split labels used in manifest rows.
inline constexpr const char* kSplitSft = "SFT";
inline constexpr const char* kSplitSrs = "SRS";
inline constexpr const char* kSplitFda = "FDA";
inline constexpr const char* kSplitFull = "FULL";
inline constexpr const char* kSplitFail = "FAIL";

inline constexpr int kGroundTruthCandidateId = -1;

struct AugmentedPair {
  std::string image_ref;
  std::string program_text;
  std::string split;
  std::string input_id;
  int candidate_id = kGroundTruthCandidateId;
  std::optional<double> score;
};

struct BalanceBin {
  double lo = 0.0;
  double hi = 0.0;
  long kept = 0;
  long dropped = 0;
};

struct DatasetManifest {
  std::vector<AugmentedPair> pairs;
  long count_sft = 0;
  long count_srs = 0;
  long count_fda = 0;
  long skipped_renders = 0;
  std::vector<BalanceBin> balance_report;
};

struct GtEntry {
  std::string input_id;
  std::string image_ref;
  std::string program_text;     // as authored
  std::string canonical_text;   // dsl::serialize(parse(program_text))
  dsl::CadProgram program;
};

struct BuildConfig {
  int resolution = 64;
  render::RenderSpec render_spec;
  std::filesystem::path renders_dir;      // FDA images are written here
  std::string image_ref_prefix = "images/";  // recorded refs stay run-relative
};

// Algorithm: one SFT pair per input, SRS-band candidates as extra targets for
// the original image (exact duplicates per input deduplicated by canonical
// text, lowest candidate_id kept), FDA-band candidates re-executed and
// rendered into synthetic inputs paired with the ground-truth text.
DatasetManifest build_gift(std::span<const verify::Verdict> verdicts,
                           std::span<const sample::CandidateSet> candidates,
                           std::span<const GtEntry> gt_set, const BuildConfig& cfg);

struct SplitManifests {
  DatasetManifest full;  // per-input top 10% (ceiling) of candidates with score > 0.5
  DatasetManifest fail;  // per-input best candidate where the input's max score < 0.9
  DatasetManifest srs;   // ground truth plus per-input top-1 in (0.9, 0.99), gt dups excluded
};

SplitManifests build_splits(std::span<const verify::Verdict> verdicts,
                            std::span<const sample::CandidateSet> candidates,
                            std::span<const GtEntry> gt_set);

// Histogram scores into [0.5, 1.0] bins; bins above the cap are downsampled
// deterministically by ascending stable hash of (input_id, candidate_id).
// Default cap: median nonzero bin count. Pairs scoring below 0.5 are never
// dropped.
DatasetManifest balance(const DatasetManifest& manifest, double bin_width = 0.05,
                        std::optional<long> cap = std::nullopt);

// Manifest JSONL fields: image_ref, program, split, input_id, candidate_id,
// score.
void write_manifest_jsonl(std::span<const AugmentedPair> pairs, std::ostream& out);
std::optional<std::vector<AugmentedPair>> read_manifest_jsonl(std::istream& in);

std::string summary_json(const DatasetManifest& manifest);

}  // namespace gf::augment
