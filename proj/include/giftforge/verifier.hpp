#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "giftforge/dsl.hpp"
#include "giftforge/voxel.hpp"

namespace gf::verify {

struct Thresholds {
  double tau_low = 0.5;
  double tau_valid = 0.9;
  double tau_match = 0.99;

  bool valid() const {
    return 0.0 < tau_low && tau_low < tau_valid && tau_valid < tau_match && tau_match <= 1.0;
  }
};

enum class Band { Match, Srs, Fda, Reject };
enum class ErrorKind { None, FailedGen, FailedExec, NotSolid };

const char* band_name(Band b);
const char* error_name(ErrorKind e);
std::optional<Band> band_from_name(const std::string& name);
std::optional<ErrorKind> error_from_name(const std::string& name);

// Band is a pure function of score and thresholds; errors always REJECT.
Band classify(std::optional<double> score, const Thresholds& t);

struct Verdict {
  std::string input_id;
  int candidate_id = 0;
  std::optional<double> score;  // absent on error
  Band band = Band::Reject;
  ErrorKind error = ErrorKind::None;
  int budget_n = 0;
  std::string config_id;
  bool exact_text_match = false;
};

struct GroundTruth {
  dsl::CadProgram program;
  std::string canonical_text;
  VoxelSolid solid;
};

// parse -> execute -> iou_best. Never throws; failures land in the verdict.
// Parse failures take precedence over geometric ones (FailedGen), geometric
// degeneracy maps to NotSolid.
Verdict verify(const std::string& candidate_text, const GroundTruth& gt, const Thresholds& t,
               int resolution, int orientations = 24);

struct RunStats {
  std::int64_t inputs = 0;
  std::int64_t candidates = 0;
  std::int64_t failed_gen = 0;
  std::int64_t failed_exec = 0;
  std::int64_t not_solid = 0;
  std::int64_t band_match = 0;
  std::int64_t band_srs = 0;
  std::int64_t band_fda = 0;
  std::int64_t band_reject = 0;
  std::int64_t unsolved_inputs = 0;  // no candidate reached tau_valid

  double valid_rate() const {
    return candidates == 0
               ? 0.0
               : 1.0 - static_cast<double>(failed_gen + failed_exec + not_solid) / candidates;
  }
  double rate(std::int64_t count) const {
    return candidates == 0 ? 0.0 : static_cast<double>(count) / candidates;
  }
};

struct CandidateRef {
  int candidate_id = 0;
  std::string text;
  std::string config_id;
};

struct VerifyTask {
  std::string input_id;
  const GroundTruth* gt = nullptr;
  int budget_n = 0;
  std::vector<CandidateRef> candidates;
};

// Verdicts ordered by (task index, candidate index) regardless of the
// parallel schedule.
std::vector<Verdict> verify_batch(std::span<const VerifyTask> tasks, const Thresholds& t,
                                  int resolution, int orientations, RunStats* stats);

// Ground-truth solids executed once per distinct (canonical text, resolution).
class GtCache {
 public:
  explicit GtCache(int resolution) : resolution_(resolution) {}

  // nullptr when the ground truth fails to execute to a usable solid.
  const GroundTruth* get_or_execute(const dsl::CadProgram& program);

  // Re-executes one seeded entry and compares occupancy; false on divergence.
  bool recheck_random_entry(std::uint64_t seed) const;

  int resolution() const { return resolution_; }

 private:
  int resolution_;
  std::map<std::uint64_t, std::unique_ptr<GroundTruth>> entries_;
};

// One JSON object per line, fields input_id, candidate_id, score, band,
// error, budget_n, config_id, exact_text_match; score omitted on error.
std::string verdict_to_json(const Verdict& v);
std::optional<Verdict> verdict_from_json(const std::string& line);

}  // namespace gf::verify
