#include "giftforge/verifier.hpp"

#include <nlohmann/json.hpp>

#include "giftforge/executor.hpp"
#include "giftforge/geometry.hpp"
#include "giftforge/rng.hpp"

namespace gf::verify {

using ordered_json = nlohmann::ordered_json;

const char* band_name(Band b) {
  switch (b) {
    case Band::Match:
      return "MATCH";
    case Band::Srs:
      return "SRS";
    case Band::Fda:
      return "FDA";
    case Band::Reject:
      return "REJECT";
  }
  return "REJECT";
}

const char* error_name(ErrorKind e) {
  switch (e) {
    case ErrorKind::None:
      return "none";
    case ErrorKind::FailedGen:
      return "FailedGen";
    case ErrorKind::FailedExec:
      return "FailedExec";
    case ErrorKind::NotSolid:
      return "NotSolid";
  }
  return "none";
}

std::optional<Band> band_from_name(const std::string& name) {
  for (Band b : {Band::Match, Band::Srs, Band::Fda, Band::Reject})
    if (name == band_name(b)) return b;
  return std::nullopt;
}

std::optional<ErrorKind> error_from_name(const std::string& name) {
  for (ErrorKind e :
       {ErrorKind::None, ErrorKind::FailedGen, ErrorKind::FailedExec, ErrorKind::NotSolid})
    if (name == error_name(e)) return e;
  return std::nullopt;
}

Band classify(std::optional<double> score, const Thresholds& t) {
  if (!score) return Band::Reject;
  const double s = *score;
  if (s >= t.tau_match) return Band::Match;
  if (s >= t.tau_valid) return Band::Srs;
  if (s >= t.tau_low) return Band::Fda;
  return Band::Reject;
}

Verdict verify(const std::string& candidate_text, const GroundTruth& gt, const Thresholds& t,
               int resolution, int orientations) {
  Verdict v;
  v.band = Band::Reject;

  const dsl::ParseResult parsed = dsl::parse(candidate_text);
  if (std::holds_alternative<dsl::ParseError>(parsed)) {
    v.error = ErrorKind::FailedGen;
    return v;
  }
  const dsl::CadProgram& program = std::get<dsl::CadProgram>(parsed);
  v.exact_text_match = dsl::serialize(program) == gt.canonical_text;

  const exec::ExecResult executed = exec::execute(program, resolution);
  if (std::holds_alternative<exec::ExecError>(executed)) {
    v.error = ErrorKind::FailedExec;
    return v;
  }
  if (std::holds_alternative<exec::NotSolid>(executed)) {
    v.error = ErrorKind::NotSolid;
    return v;
  }

  const auto scored = geom::iou_best(std::get<VoxelSolid>(executed), gt.solid, resolution,
                                     orientations);
  if (std::holds_alternative<geom::DegenerateShape>(scored)) {
    v.error = ErrorKind::NotSolid;
    return v;
  }
  v.score = std::get<geom::IouBestResult>(scored).score;
  v.band = classify(v.score, t);
  return v;
}

std::vector<Verdict> verify_batch(std::span<const VerifyTask> tasks, const Thresholds& t,
                                  int resolution, int orientations, RunStats* stats) {
  struct Slot {
    std::size_t task;
    std::size_t cand;
  };
  std::vector<Slot> slots;
  std::size_t total = 0;
  for (const VerifyTask& task : tasks) total += task.candidates.size();
  slots.reserve(total);
  std::vector<std::size_t> first_slot(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    first_slot[i] = slots.size();
    for (std::size_t k = 0; k < tasks[i].candidates.size(); ++k) slots.push_back({i, k});
  }

  std::vector<Verdict> verdicts(slots.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(slots.size()); ++s) {
    const VerifyTask& task = tasks[slots[s].task];
    const CandidateRef& cand = task.candidates[slots[s].cand];
    Verdict v = verify(cand.text, *task.gt, t, resolution, orientations);
    v.input_id = task.input_id;
    v.candidate_id = cand.candidate_id;
    v.budget_n = task.budget_n;
    v.config_id = cand.config_id;
    verdicts[s] = std::move(v);
  }

  if (stats) {
    *stats = RunStats{};
    stats->inputs = static_cast<std::int64_t>(tasks.size());
    stats->candidates = static_cast<std::int64_t>(verdicts.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      bool solved = false;
      const std::size_t end =
          i + 1 < tasks.size() ? first_slot[i + 1] : verdicts.size();
      for (std::size_t s = first_slot[i]; s < end; ++s) {
        const Verdict& v = verdicts[s];
        switch (v.error) {
          case ErrorKind::FailedGen:
            ++stats->failed_gen;
            break;
          case ErrorKind::FailedExec:
            ++stats->failed_exec;
            break;
          case ErrorKind::NotSolid:
            ++stats->not_solid;
            break;
          case ErrorKind::None:
            break;
        }
        switch (v.band) {
          case Band::Match:
            ++stats->band_match;
            break;
          case Band::Srs:
            ++stats->band_srs;
            break;
          case Band::Fda:
            ++stats->band_fda;
            break;
          case Band::Reject:
            ++stats->band_reject;
            break;
        }
        if (v.score && *v.score >= t.tau_valid) solved = true;
      }
      if (!solved) ++stats->unsolved_inputs;
    }
  }
  return verdicts;
}

const GroundTruth* GtCache::get_or_execute(const dsl::CadProgram& program) {
  auto gt = std::make_unique<GroundTruth>();
  gt->canonical_text = dsl::serialize(program);
  const std::uint64_t key =
      mix_hash(fnv1a64(gt->canonical_text), static_cast<std::uint64_t>(resolution_));
  if (const auto it = entries_.find(key); it != entries_.end()) return it->second.get();

  exec::ExecResult executed = exec::execute(program, resolution_);
  if (!std::holds_alternative<VoxelSolid>(executed)) return nullptr;
  gt->program = program;
  gt->solid = std::move(std::get<VoxelSolid>(executed));
  return entries_.emplace(key, std::move(gt)).first->second.get();
}

bool GtCache::recheck_random_entry(std::uint64_t seed) const {
  if (entries_.empty()) return true;
  Prng rng(seed);
  auto it = entries_.begin();
  std::advance(it, static_cast<long>(rng.next_below(entries_.size())));
  const GroundTruth& gt = *it->second;
  exec::ExecResult executed = exec::execute(gt.program, resolution_);
  if (!std::holds_alternative<VoxelSolid>(executed)) return false;
  return std::get<VoxelSolid>(executed).occupancy_equal(gt.solid);
}

std::string verdict_to_json(const Verdict& v) {
  ordered_json j;
  j["input_id"] = v.input_id;
  j["candidate_id"] = v.candidate_id;
  if (v.score) j["score"] = *v.score;
  j["band"] = band_name(v.band);
  j["error"] = error_name(v.error);
  j["budget_n"] = v.budget_n;
  j["config_id"] = v.config_id;
  j["exact_text_match"] = v.exact_text_match;
  return j.dump();
}

std::optional<Verdict> verdict_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  Verdict v;
  try {
    v.input_id = j.at("input_id").get<std::string>();
    v.candidate_id = j.at("candidate_id").get<int>();
    if (j.contains("score")) v.score = j.at("score").get<double>();
    const auto band = band_from_name(j.at("band").get<std::string>());
    const auto error = error_from_name(j.at("error").get<std::string>());
    if (!band || !error) return std::nullopt;
    v.band = *band;
    v.error = *error;
    v.budget_n = j.at("budget_n").get<int>();
    v.config_id = j.at("config_id").get<std::string>();
    v.exact_text_match = j.value("exact_text_match", false);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  return v;
}

}  // namespace gf::verify
