#include "giftforge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "giftforge/rng.hpp"

namespace gf::sample {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string config_label(int budget, double t, double p) {
  std::ostringstream os;
  os << "n" << budget << "_t" << dsl::format_number(t) << "_p" << dsl::format_number(p);
  return os.str();
}

PlanEntry make_entry(int budget, long inputs,
                     std::initializer_list<std::pair<double, std::initializer_list<double>>> rows) {
  PlanEntry entry;
  entry.budget_n = budget;
  entry.inputs_per_budget = inputs;
  for (const auto& [t, ps] : rows)
    for (double p : ps) entry.configs.push_back({t, p, config_label(budget, t, p)});
  return entry;
}

}  // namespace

SamplingPlan plan_default() {
  SamplingPlan plan;
  plan.entries.push_back(make_entry(8, 10000,
                                    {{0.2, {0.7, 0.8, 0.9, 1.0}},
                                     {0.4, {0.7, 0.8, 0.9, 1.0}},
                                     {0.6, {0.8, 0.9, 1.0}}}));
  plan.entries.push_back(
      make_entry(16, 10000, {{0.2, {0.7, 0.8, 0.9, 1.0}}, {0.4, {0.8, 0.9, 1.0}}}));
  plan.entries.push_back(
      make_entry(32, 40000, {{0.2, {0.7, 0.8, 0.9, 1.0}}, {0.4, {0.9, 1.0}}}));
  plan.entries.push_back(make_entry(64, 10000, {{0.2, {0.8, 0.9, 1.0}}}));
  plan.entries.push_back(make_entry(128, 10000, {{0.2, {0.9, 1.0}}}));
  return plan;
}

bool is_stock_budget(int n) {
  for (int b : kStockBudgets)
    if (b == n) return true;
  return false;
}

std::string plan_to_json(const SamplingPlan& plan) {
  ordered_json j;
  j["entries"] = ordered_json::array();
  for (const PlanEntry& entry : plan.entries) {
    ordered_json e;
    e["budget_n"] = entry.budget_n;
    e["inputs_per_budget"] = entry.inputs_per_budget;
    e["configs"] = ordered_json::array();
    for (const SamplerConfig& cfg : entry.configs)
      e["configs"].push_back({{"temperature", cfg.temperature}, {"top_p", cfg.top_p}});
    j["entries"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::optional<SamplingPlan> plan_from_json(const std::string& text, std::string* warning) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("entries")) return std::nullopt;
  SamplingPlan plan;
  try {
    for (const auto& e : j.at("entries")) {
      PlanEntry entry;
      entry.budget_n = e.at("budget_n").get<int>();
      entry.inputs_per_budget = e.value("inputs_per_budget", 0L);
      for (const auto& c : e.at("configs")) {
        SamplerConfig cfg;
        cfg.temperature = c.at("temperature").get<double>();
        cfg.top_p = c.at("top_p").get<double>();
        cfg.id = config_label(entry.budget_n, cfg.temperature, cfg.top_p);
        entry.configs.push_back(std::move(cfg));
      }
      if (entry.configs.empty()) return std::nullopt;
      if (!is_stock_budget(entry.budget_n) && warning) {
        if (!warning->empty()) *warning += "; ";
        *warning += "budget N=" + std::to_string(entry.budget_n) + " is not a stock budget";
      }
      plan.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  return plan.entries.empty() ? std::nullopt : std::make_optional(plan);
}

namespace {

// Statements that produced the top-of-stack solid right before the boolean at
// `index`, as [begin, index). Forward stack simulation over a known-valid
// prefix; each stack entry remembers the statement index that started it.
std::optional<std::pair<std::size_t, std::size_t>> right_operand_span(
    const std::vector<dsl::Statement>& sts, std::size_t index) {
  std::vector<std::size_t> sketch_begin;
  std::vector<std::size_t> solid_begin;
  for (std::size_t i = 0; i < index; ++i) {
    switch (sts[i].op) {
      case dsl::Opcode::Plane:
      case dsl::Opcode::Translate:
        break;
      case dsl::Opcode::Rect:
      case dsl::Opcode::Circle:
      case dsl::Opcode::Poly:
        sketch_begin.push_back(i);
        break;
      case dsl::Opcode::Extrude:
        solid_begin.push_back(sketch_begin.back());
        sketch_begin.pop_back();
        break;
      default: {  // boolean: result inherits the left operand's begin
        solid_begin.pop_back();
        break;
      }
    }
  }
  if (solid_begin.size() < 2) return std::nullopt;
  return std::make_pair(solid_begin.back(), index);
}

}  // namespace

CandidateSet sample_mock(const dsl::CadProgram& gt, const std::string& input_id,
                         const PlanEntry& entry, const MockParams& params,
                         std::uint64_t run_seed) {
  CandidateSet set;
  set.input_id = input_id;
  set.budget_n = entry.budget_n;
  set.candidates.reserve(entry.budget_n);

  for (int k = 0; k < entry.budget_n; ++k) {
    const SamplerConfig& cfg = entry.configs[k % entry.configs.size()];
    const std::uint64_t seed = derive_seed(run_seed, input_id, cfg.id, k);
    Prng rng(seed);

    dsl::CadProgram mutated;
    mutated.statements = gt.statements;

    // Drop one boolean subtree.
    if (rng.next_unit() < params.p_drop) {
      std::vector<std::size_t> booleans;
      for (std::size_t i = 0; i < mutated.statements.size(); ++i)
        if (dsl::is_boolean(mutated.statements[i].op)) booleans.push_back(i);
      if (!booleans.empty()) {
        const std::size_t pick = booleans[rng.next_below(booleans.size())];
        if (const auto span = right_operand_span(mutated.statements, pick)) {
          mutated.statements.erase(mutated.statements.begin() + pick);
          mutated.statements.erase(mutated.statements.begin() + span->first,
                                   mutated.statements.begin() + span->second);
        }
      }
    }

    // Multiplicative jitter on numeric literals; plane selectors stay fixed.
    const double sigma = params.sigma * cfg.temperature;
    for (dsl::Statement& st : mutated.statements) {
      const std::size_t first = st.op == dsl::Opcode::Plane ? 1 : 0;
      for (std::size_t a = first; a < st.args.size(); ++a)
        if (rng.next_unit() < params.p_jitter) st.args[a] *= std::exp(rng.next_normal(sigma));
    }

    std::string text = dsl::serialize(mutated);

    // Token corruption guaranteeing a parse failure.
    if (rng.next_unit() < params.p_syntax) {
      std::vector<std::string> lines;
      std::istringstream is(text);
      for (std::string line; std::getline(is, line);) lines.push_back(line);
      std::vector<std::pair<std::size_t, std::size_t>> token_refs;
      std::vector<std::vector<std::string>> line_tokens(lines.size());
      for (std::size_t li = 0; li < lines.size(); ++li) {
        std::istringstream ls(lines[li]);
        for (std::string tok; ls >> tok;) {
          line_tokens[li].push_back(tok);
          token_refs.emplace_back(li, line_tokens[li].size() - 1);
        }
      }
      if (!token_refs.empty()) {
        const auto [li, ti] = token_refs[rng.next_below(token_refs.size())];
        line_tokens[li][ti] = "?";
        text.clear();
        for (const auto& toks : line_tokens) {
          for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) text += ' ';
            text += toks[i];
          }
          text += '\n';
        }
      }
    }

    set.candidates.push_back({k, std::move(text), cfg.id, seed});
  }
  return set;
}

void write_candidates_jsonl(std::span<const CandidateSet> sets, std::ostream& out) {
  for (const CandidateSet& set : sets)
    for (const Candidate& cand : set.candidates) {
      ordered_json j;
      j["input_id"] = set.input_id;
      j["candidate_id"] = cand.candidate_id;
      j["config_id"] = cand.config_id;
      j["budget_n"] = set.budget_n;
      j["seed"] = cand.seed;
      j["text"] = cand.text;
      out << j.dump() << '\n';
    }
}

std::optional<std::vector<CandidateSet>> read_candidates_jsonl(std::istream& in) {
  std::map<std::string, CandidateSet> by_input;
  std::vector<std::string> order;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    try {
      const std::string input_id = j.at("input_id").get<std::string>();
      auto [it, inserted] = by_input.try_emplace(input_id);
      if (inserted) {
        it->second.input_id = input_id;
        order.push_back(input_id);
      }
      Candidate cand;
      cand.candidate_id = j.at("candidate_id").get<int>();
      cand.config_id = j.value("config_id", std::string{});
      cand.seed = j.value("seed", 0ULL);
      cand.text = j.at("text").get<std::string>();
      it->second.budget_n = j.value("budget_n", 0);
      it->second.candidates.push_back(std::move(cand));
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }
  std::vector<CandidateSet> out;
  out.reserve(order.size());
  for (const std::string& id : order) {
    CandidateSet& set = by_input[id];
    std::sort(set.candidates.begin(), set.candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                return a.candidate_id < b.candidate_id;
              });
    if (set.budget_n == 0) set.budget_n = static_cast<int>(set.candidates.size());
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace gf::sample
