#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "giftforge/dsl.hpp"

namespace gf::sample {

struct SamplerConfig {
  double temperature = 0.2;
  double top_p = 1.0;
  std::string id;  // stable identifier, e.g. "n8_t0.2_p0.7"
};

struct PlanEntry {
  int budget_n = 8;
  std::vector<SamplerConfig> configs;
  long inputs_per_budget = 0;
};

struct SamplingPlan {
  std::vector<PlanEntry> entries;
};

// The stock budget mix: N in {8,16,32,64,128} with inverse hyperparameter
// scaling (wide temperatures at low budgets, T=0.2 only at high budgets).
SamplingPlan plan_default();

inline constexpr int kStockBudgets[5] = {8, 16, 32, 64, 128};
bool is_stock_budget(int n);

std::string plan_to_json(const SamplingPlan& plan);
std::optional<SamplingPlan> plan_from_json(const std::string& text, std::string* warning);

struct Candidate {
  int candidate_id = 0;
  std::string text;  // empty text marks a generation-failure placeholder
  std::string config_id;
  std::uint64_t seed = 0;
};

struct CandidateSet {
  std::string input_id;
  int budget_n = 0;
  std::vector<Candidate> candidates;
};

struct MockParams {
  double sigma = 0.1;      // log-space jitter scale, multiplied by temperature
  double p_jitter = 0.8;   // per-literal jitter probability
  double p_drop = 0.05;    // probability of removing one boolean subtree
  double p_syntax = 0.03;  // probability of corrupting one token
};

// Synthetic policy: perturbs the ground-truth program. Candidate k is fully
// determined by (run_seed, input_id, config_id, k). Configs are assigned
// round-robin over the entry's list.
CandidateSet sample_mock(const dsl::CadProgram& gt, const std::string& input_id,
                         const PlanEntry& entry, const MockParams& params,
                         std::uint64_t run_seed);

struct HttpOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string prompt = "generate program code for the image";
  int retries = 3;
  int backoff_ms = 100;
  int max_in_flight = 8;
};

struct TransportError {
  std::string message;
};
struct MalformedResponse {
  std::string message;
};

using HttpResult = std::variant<CandidateSet, TransportError, MalformedResponse>;

// One POST /generate per config with that config's share of the budget.
// Short responses are padded with generation-failure placeholders so budget
// accounting stays exact.
HttpResult sample_http(const HttpOptions& options, const std::string& input_id,
                       const std::string& image_ref, const PlanEntry& entry,
                       std::uint64_t run_seed);

// Candidate JSONL: one {input_id, candidate_id, config_id, seed, text} object
// per line.
void write_candidates_jsonl(std::span<const CandidateSet> sets, std::ostream& out);
std::optional<std::vector<CandidateSet>> read_candidates_jsonl(std::istream& in);

}  // namespace gf::sample
