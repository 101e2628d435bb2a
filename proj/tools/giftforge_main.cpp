#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "giftforge/augmentor.hpp"
#include "giftforge/dataset.hpp"
#include "giftforge/dsl.hpp"
#include "giftforge/executor.hpp"
#include "giftforge/metrics.hpp"
#include "giftforge/parallel.hpp"
#include "giftforge/renderer.hpp"
#include "giftforge/rng.hpp"
#include "giftforge/sampler.hpp"
#include "giftforge/verifier.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTransport = 3;

struct RunConfig {
  int resolution = 64;
  int orientations = 24;
  gf::verify::Thresholds thresholds;
  std::uint64_t seed = 42;
  int workers = 0;
  std::string source = "mock";  // mock | http | file
  std::string endpoint;
  std::string prompt = "generate program code for the image";
  std::string candidates_file;
  gf::sample::MockParams mock;
  std::string plan_path;  // empty: default plan (or --budget shortcut)
  int budget = 0;         // nonzero: single-budget plan
  std::string gt_dir;
  std::string out_dir;
};

int fail(int code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

void apply_config_file(RunConfig& cfg, const nlohmann::json& j) {
  cfg.resolution = j.value("resolution", cfg.resolution);
  cfg.orientations = j.value("orientations", cfg.orientations);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.thresholds.tau_low = t.value("tau_low", cfg.thresholds.tau_low);
    cfg.thresholds.tau_valid = t.value("tau_valid", cfg.thresholds.tau_valid);
    cfg.thresholds.tau_match = t.value("tau_match", cfg.thresholds.tau_match);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.source = j.value("source", cfg.source);
  cfg.endpoint = j.value("endpoint", cfg.endpoint);
  cfg.prompt = j.value("prompt", cfg.prompt);
  cfg.candidates_file = j.value("candidates_file", cfg.candidates_file);
  if (j.contains("mock")) {
    const auto& m = j.at("mock");
    cfg.mock.sigma = m.value("sigma", cfg.mock.sigma);
    cfg.mock.p_jitter = m.value("p_jitter", cfg.mock.p_jitter);
    cfg.mock.p_drop = m.value("p_drop", cfg.mock.p_drop);
    cfg.mock.p_syntax = m.value("p_syntax", cfg.mock.p_syntax);
  }
  cfg.plan_path = j.value("plan", cfg.plan_path);
  cfg.budget = j.value("budget", cfg.budget);
  cfg.gt_dir = j.value("gt_dir", cfg.gt_dir);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
}

// Flags > GIFTFORGE_WORKERS > config file > defaults.
void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--resolution", cfg.resolution, "Voxel cells per axis");
  cmd->add_option("--orientations", cfg.orientations, "Orientation search size (24 or 48)")
      ->check(CLI::IsMember({24, 48}));
  cmd->add_option("--tau-low", cfg.thresholds.tau_low, "Lower IoU threshold");
  cmd->add_option("--tau-valid", cfg.thresholds.tau_valid, "Validity IoU threshold");
  cmd->add_option("--tau-match", cfg.thresholds.tau_match, "Match IoU threshold");
  cmd->add_option("--seed", cfg.seed, "Run seed");
  cmd->add_option("--workers", cfg.workers, "Worker threads (0 = all)");
  cmd->add_option("--source", cfg.source, "Candidate source: mock, http or file")
      ->check(CLI::IsMember({"mock", "http", "file"}));
  cmd->add_option("--endpoint", cfg.endpoint, "Model server base URL for --source http");
  cmd->add_option("--prompt", cfg.prompt, "Prompt forwarded to the model server");
  cmd->add_option("--candidates", cfg.candidates_file, "Candidate JSONL for --source file");
  cmd->add_option("--sigma", cfg.mock.sigma, "Mock jitter scale");
  cmd->add_option("--p-jitter", cfg.mock.p_jitter, "Mock per-literal jitter probability");
  cmd->add_option("--p-drop", cfg.mock.p_drop, "Mock boolean-drop probability");
  cmd->add_option("--p-syntax", cfg.mock.p_syntax, "Mock token-corruption probability");
  cmd->add_option("--plan", cfg.plan_path, "Sampling plan JSON path");
  cmd->add_option("--budget", cfg.budget, "Single-budget shortcut (overrides --plan)");
  cmd->add_option("--gt", cfg.gt_dir, "Ground-truth dataset directory");
  cmd->add_option("--out", cfg.out_dir, "Run output directory");
}

std::string default_out_dir(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  return "runs/" + std::to_string(secs) + "-" + std::to_string(seed);
}

struct PlanChoice {
  gf::sample::SamplingPlan plan;
  std::string description;
};

std::optional<PlanChoice> resolve_plan(const RunConfig& cfg, std::string* error) {
  if (cfg.budget > 0) {
    PlanChoice choice;
    const gf::sample::SamplingPlan stock = gf::sample::plan_default();
    gf::sample::PlanEntry entry;
    bool found = false;
    for (const auto& e : stock.entries)
      if (e.budget_n == cfg.budget) {
        entry = e;
        found = true;
        break;
      }
    if (!found) {
      std::cerr << "warning: budget N=" << cfg.budget
                << " is not a stock budget; using T=0.2, p=1.0\n";
      entry.budget_n = cfg.budget;
      entry.configs.push_back({0.2, 1.0,
                               "n" + std::to_string(cfg.budget) + "_t0.2_p1"});
    }
    entry.inputs_per_budget = 0;  // applies to every input
    choice.plan.entries.push_back(std::move(entry));
    choice.description = "budget " + std::to_string(cfg.budget);
    return choice;
  }
  if (!cfg.plan_path.empty()) {
    const auto text = gf::dataset::read_file(cfg.plan_path);
    if (!text) {
      *error = "cannot read plan file " + cfg.plan_path;
      return std::nullopt;
    }
    std::string warning;
    const auto plan = gf::sample::plan_from_json(*text, &warning);
    if (!plan) {
      *error = "invalid plan file " + cfg.plan_path;
      return std::nullopt;
    }
    if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
    return PlanChoice{*plan, cfg.plan_path};
  }
  return PlanChoice{gf::sample::plan_default(), "default"};
}

// Entries consume inputs_per_budget inputs in corpus order; a zero count (or
// exhausted plan) sends the remainder to the last entry.
std::vector<const gf::sample::PlanEntry*> assign_entries(
    const gf::sample::SamplingPlan& plan, std::size_t input_count) {
  std::vector<const gf::sample::PlanEntry*> assignment(input_count, nullptr);
  std::size_t next = 0;
  for (const auto& entry : plan.entries) {
    if (next >= input_count) break;
    const std::size_t take = entry.inputs_per_budget <= 0
                                 ? input_count - next
                                 : std::min<std::size_t>(entry.inputs_per_budget,
                                                         input_count - next);
    for (std::size_t i = 0; i < take; ++i) assignment[next++] = &entry;
  }
  while (next < input_count) assignment[next++] = &plan.entries.back();
  return assignment;
}

ordered_json config_echo(const RunConfig& cfg, const std::string& plan_desc,
                         std::span<const gf::augment::GtEntry> gt_set) {
  ordered_json j;
  j["resolution"] = cfg.resolution;
  j["orientations"] = cfg.orientations;
  j["thresholds"] = {{"tau_low", cfg.thresholds.tau_low},
                     {"tau_valid", cfg.thresholds.tau_valid},
                     {"tau_match", cfg.thresholds.tau_match}};
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["source"] = cfg.source;
  j["endpoint"] = cfg.endpoint;
  j["prompt"] = cfg.prompt;
  j["mock"] = {{"sigma", cfg.mock.sigma},
               {"p_jitter", cfg.mock.p_jitter},
               {"p_drop", cfg.mock.p_drop},
               {"p_syntax", cfg.mock.p_syntax}};
  j["plan"] = plan_desc;
  j["budget"] = cfg.budget;
  j["gt_dir"] = cfg.gt_dir;
  j["inputs"] = ordered_json::array();
  for (const auto& gt : gt_set)
    j["inputs"].push_back(
        {{"id", gt.input_id}, {"hash", gf::dataset::hash_hex(gf::fnv1a64(gt.program_text))}});
  return j;
}

struct LoadedRun {
  std::vector<gf::augment::GtEntry> gt_set;
  fs::path out;
};

std::optional<LoadedRun> prepare_run(RunConfig& cfg, std::string* error) {
  if (cfg.gt_dir.empty()) {
    *error = "--gt is required";
    return std::nullopt;
  }
  gf::dataset::LoadError load_error;
  auto gt_set = gf::dataset::load_gt_dir(cfg.gt_dir, &load_error);
  if (!gt_set) {
    *error = load_error.message;
    return std::nullopt;
  }
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir(cfg.seed);
  LoadedRun run;
  run.gt_set = std::move(*gt_set);
  run.out = cfg.out_dir;
  std::error_code ec;
  fs::create_directories(run.out / "images", ec);
  fs::create_directories(run.out / "splits", ec);
  if (ec) {
    *error = "cannot create run directory " + run.out.string();
    return std::nullopt;
  }
  return run;
}

// Inputs without an on-disk image get a deterministic ground-truth render;
// refs stay run-relative.
bool ensure_gt_images(std::vector<gf::augment::GtEntry>& gt_set, const fs::path& out,
                      const RunConfig& cfg, std::string* error, bool also_png = false) {
  for (auto& gt : gt_set) {
    if (!gt.image_ref.empty()) continue;
    const gf::exec::ExecResult executed = gf::exec::execute(gt.program, cfg.resolution);
    if (!std::holds_alternative<gf::VoxelSolid>(executed)) {
      *error = "ground truth " + gt.input_id + " does not execute to a solid";
      return false;
    }
    const gf::render::RenderResult image =
        gf::render::render(std::get<gf::VoxelSolid>(executed), gf::render::RenderSpec{});
    if (!std::holds_alternative<gf::render::Image>(image)) {
      *error = "ground truth " + gt.input_id + " renders empty";
      return false;
    }
    const std::string name = "gt_" + gt.input_id + ".pgm";
    if (!gf::render::write_pgm_file(std::get<gf::render::Image>(image), out / "images" / name)) {
      *error = "cannot write " + (out / "images" / name).string();
      return false;
    }
    if (also_png)
      gf::render::write_png_file(std::get<gf::render::Image>(image),
                                 out / "images" / ("gt_" + gt.input_id + ".png"));
    gt.image_ref = "images/" + name;
  }
  return true;
}

struct SampleOutcome {
  std::vector<gf::sample::CandidateSet> sets;
  int exit_code = kExitOk;
  std::string error;
};

SampleOutcome run_sampling(const RunConfig& cfg, const gf::sample::SamplingPlan& plan,
                           std::span<const gf::augment::GtEntry> gt_set) {
  SampleOutcome outcome;
  const auto assignment = assign_entries(plan, gt_set.size());

  if (cfg.source == "file") {
    const std::string path =
        cfg.candidates_file.empty() ? (fs::path(cfg.out_dir) / "candidates.jsonl").string()
                                    : cfg.candidates_file;
    std::ifstream in(path);
    if (!in) {
      outcome.exit_code = kExitConfig;
      outcome.error = "cannot read candidates file " + path;
      return outcome;
    }
    auto sets = gf::sample::read_candidates_jsonl(in);
    if (!sets) {
      outcome.exit_code = kExitConfig;
      outcome.error = "malformed candidates file " + path;
      return outcome;
    }
    outcome.sets = std::move(*sets);
    return outcome;
  }

  for (std::size_t i = 0; i < gt_set.size(); ++i) {
    const gf::sample::PlanEntry& entry = *assignment[i];
    if (cfg.source == "mock") {
      outcome.sets.push_back(gf::sample::sample_mock(gt_set[i].program, gt_set[i].input_id,
                                                     entry, cfg.mock, cfg.seed));
    } else {  // http
      gf::sample::HttpOptions options;
      options.endpoint = cfg.endpoint;
      options.prompt = cfg.prompt;
      gf::sample::HttpResult result = gf::sample::sample_http(
          options, gt_set[i].input_id, gt_set[i].image_ref, entry, cfg.seed);
      if (std::holds_alternative<gf::sample::TransportError>(result)) {
        outcome.exit_code = kExitTransport;
        outcome.error = std::get<gf::sample::TransportError>(result).message;
        return outcome;
      }
      if (std::holds_alternative<gf::sample::MalformedResponse>(result)) {
        outcome.exit_code = kExitTransport;
        outcome.error = std::get<gf::sample::MalformedResponse>(result).message;
        return outcome;
      }
      outcome.sets.push_back(std::move(std::get<gf::sample::CandidateSet>(result)));
    }
  }
  return outcome;
}

struct VerifyOutcome {
  std::vector<gf::verify::Verdict> verdicts;
  gf::verify::RunStats stats;
  int exit_code = kExitOk;
  std::string error;
};

VerifyOutcome run_verification(const RunConfig& cfg,
                               std::span<const gf::augment::GtEntry> gt_set,
                               std::span<const gf::sample::CandidateSet> sets) {
  VerifyOutcome outcome;
  gf::verify::GtCache cache(cfg.resolution);
  std::vector<gf::verify::VerifyTask> tasks;
  for (const auto& gt : gt_set) {
    const gf::verify::GroundTruth* cached = cache.get_or_execute(gt.program);
    if (!cached) {
      outcome.exit_code = kExitConfig;
      outcome.error = "ground truth " + gt.input_id + " does not execute to a solid";
      return outcome;
    }
    gf::verify::VerifyTask task;
    task.input_id = gt.input_id;
    task.gt = cached;
    for (const auto& set : sets) {
      if (set.input_id != gt.input_id) continue;
      task.budget_n = set.budget_n;
      for (const auto& cand : set.candidates)
        task.candidates.push_back({cand.candidate_id, cand.text, cand.config_id});
      break;
    }
    tasks.push_back(std::move(task));
  }
  outcome.verdicts = gf::verify::verify_batch(tasks, cfg.thresholds, cfg.resolution,
                                              cfg.orientations, &outcome.stats);
  if (!cache.recheck_random_entry(cfg.seed)) {
    outcome.exit_code = kExitConfig;
    outcome.error = "ground-truth cache recheck diverged";
  }
  return outcome;
}

gf::metrics::ScoreMatrix matrix_from_verdicts(std::span<const gf::verify::Verdict> verdicts,
                                              std::span<const gf::augment::GtEntry> gt_set) {
  gf::metrics::ScoreMatrix m;
  m.label = "run";
  std::map<std::string, std::map<int, double>> by_input;
  for (const auto& v : verdicts)
    by_input[v.input_id][v.candidate_id] = v.score ? *v.score : 0.0;
  for (const auto& gt : gt_set) {
    m.input_ids.push_back(gt.input_id);
    std::vector<double> row;
    const auto it = by_input.find(gt.input_id);
    if (it != by_input.end())
      for (const auto& [cand, score] : it->second) row.push_back(score);
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::string format_fixed(double v, int decimals) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << v;
  return os.str();
}

ordered_json metrics_report(const RunConfig& cfg, const gf::verify::RunStats& stats,
                            const gf::metrics::ScoreMatrix& matrix,
                            std::span<const gf::augment::GtEntry> gt_set) {
  ordered_json report;

  ordered_json stats_json;
  stats_json["inputs"] = stats.inputs;
  stats_json["candidates"] = stats.candidates;
  stats_json["valid_rate"] = stats.valid_rate();
  stats_json["failed_gen"] = stats.failed_gen;
  stats_json["failed_exec"] = stats.failed_exec;
  stats_json["not_solid"] = stats.not_solid;
  stats_json["failed_gen_rate"] = stats.rate(stats.failed_gen);
  stats_json["failed_exec_rate"] = stats.rate(stats.failed_exec);
  stats_json["not_solid_rate"] = stats.rate(stats.not_solid);
  stats_json["band_match"] = stats.band_match;
  stats_json["band_srs"] = stats.band_srs;
  stats_json["band_fda"] = stats.band_fda;
  stats_json["band_reject"] = stats.band_reject;
  stats_json["unsolved_inputs"] = stats.unsolved_inputs;
  report["run_stats"] = std::move(stats_json);

  std::size_t min_n = 0;
  if (!matrix.rows.empty()) {
    min_n = matrix.rows.front().size();
    for (const auto& row : matrix.rows) min_n = std::min(min_n, row.size());
  }

  ordered_json passk_first = ordered_json::object();
  ordered_json passk_subset = ordered_json::object();
  for (std::size_t k = 1; k <= min_n; ++k) {
    const auto first =
        gf::metrics::pass_at_k(matrix, static_cast<int>(k), gf::metrics::PassKEstimator::FirstK);
    const auto subset = gf::metrics::pass_at_k(matrix, static_cast<int>(k),
                                               gf::metrics::PassKEstimator::SubsetExact);
    if (std::holds_alternative<double>(first))
      passk_first[std::to_string(k)] = std::get<double>(first);
    if (std::holds_alternative<double>(subset))
      passk_subset[std::to_string(k)] = std::get<double>(subset);
  }
  report["pass_at_k"] = {{"first_k", passk_first}, {"subset_exact", passk_subset}};

  if (min_n >= 1) {
    const int k = static_cast<int>(std::min<std::size_t>(10, min_n));
    const auto gap = gf::metrics::amortization_gap(matrix, k);
    if (std::holds_alternative<gf::metrics::AmortizationGap>(gap)) {
      const auto& g = std::get<gf::metrics::AmortizationGap>(gap);
      report["amortization_gap"] = {{"k", k},
                                    {"pass1", g.pass1},
                                    {"passk", g.passk},
                                    {"gap_percent", g.gap_percent}};
    }
  }

  for (const bool include_exact : {true, false}) {
    const auto sel = gf::metrics::selection_stats(matrix, include_exact);
    ordered_json s;
    if (sel.top10_mean) s["top10_mean"] = *sel.top10_mean;
    if (sel.top1_mean) s["top1_mean"] = *sel.top1_mean;
    s["top10_count"] = sel.top10_count;
    s["top1_count"] = sel.top1_count;
    report[include_exact ? "selection_with_exact" : "selection_without_exact"] = std::move(s);
  }

  std::vector<double> all_scores;
  double total = 0.0;
  for (const auto& row : matrix.rows)
    for (double s : row) {
      all_scores.push_back(s);
      total += s;
    }
  if (!all_scores.empty()) {
    std::vector<double> sorted = all_scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    report["mean_iou"] = total / static_cast<double>(n);
    report["median_iou"] = median;
    double below_low = 0.0;
    for (double s : sorted)
      if (s < cfg.thresholds.tau_low) ++below_low;
    report["fraction_below_tau_low"] = below_low / static_cast<double>(n);

    ordered_json ecdf_json = ordered_json::array();
    for (const auto& [score, frac] : gf::metrics::ecdf(all_scores))
      ecdf_json.push_back({score, frac});
    report["ecdf"] = std::move(ecdf_json);
  }

  std::vector<gf::dsl::ComplexityProfile> profiles;
  for (const auto& gt : gt_set) profiles.push_back(gf::dsl::complexity(gt.program));
  const std::vector<double> token_edges = {0, 8, 16, 24, 32, 48, 64, 1e9};
  const std::vector<double> op_edges = {1, 2, 3, 4, 5, 6, 1e9};
  auto bucket_json = [](const std::vector<gf::metrics::ComplexityBucket>& buckets) {
    ordered_json arr = ordered_json::array();
    for (const auto& b : buckets) {
      ordered_json jb;
      jb["lo"] = b.lo;
      jb["hi"] = b.hi;
      jb["inputs"] = b.inputs;
      if (b.mean_iou) jb["mean_iou"] = *b.mean_iou;
      if (b.best_iou) jb["best_iou"] = *b.best_iou;
      if (b.solved_ratio) jb["solved_ratio"] = *b.solved_ratio;
      arr.push_back(std::move(jb));
    }
    return arr;
  };
  const auto tokens = gf::metrics::complexity_buckets(matrix, profiles, token_edges,
                                                      gf::metrics::ComplexityAxis::Tokens);
  if (std::holds_alternative<std::vector<gf::metrics::ComplexityBucket>>(tokens))
    report["buckets_tokens"] =
        bucket_json(std::get<std::vector<gf::metrics::ComplexityBucket>>(tokens));
  const auto ops = gf::metrics::complexity_buckets(matrix, profiles, op_edges,
                                                   gf::metrics::ComplexityAxis::Operations);
  if (std::holds_alternative<std::vector<gf::metrics::ComplexityBucket>>(ops))
    report["buckets_ops"] = bucket_json(std::get<std::vector<gf::metrics::ComplexityBucket>>(ops));

  long solved = 0;
  for (const auto& row : matrix.rows) {
    for (double s : row)
      if (s >= gf::metrics::kSolvedThreshold) {
        ++solved;
        break;
      }
  }
  report["solved_ratio"] = matrix.rows.empty()
                               ? 0.0
                               : static_cast<double>(solved) / static_cast<double>(matrix.rows.size());
  return report;
}

// Per-figure CSVs: the pass@k curve, the ecdf, and the complexity buckets.
void write_figure_csvs(const ordered_json& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (report.contains("pass_at_k")) {
    std::ofstream f(dir / "passk.csv");
    f << "k,first_k,subset_exact\n";
    const auto& first = report["pass_at_k"]["first_k"];
    const auto& subset = report["pass_at_k"]["subset_exact"];
    for (const auto& [k, v] : first.items()) {
      f << k << ',' << v.dump() << ',';
      if (subset.contains(k)) f << subset[k].dump();
      f << '\n';
    }
  }
  if (report.contains("ecdf")) {
    std::ofstream f(dir / "ecdf.csv");
    f << "score,cumulative_fraction\n";
    for (const auto& pair : report["ecdf"])
      f << pair[0].dump() << ',' << pair[1].dump() << '\n';
  }
  for (const char* key : {"buckets_tokens", "buckets_ops"}) {
    if (!report.contains(key)) continue;
    std::ofstream f(dir / (std::string(key) + ".csv"));
    f << "lo,hi,inputs,mean_iou,best_iou,solved_ratio\n";
    for (const auto& b : report[key]) {
      f << b["lo"].dump() << ',' << b["hi"].dump() << ',' << b["inputs"].dump() << ',';
      f << (b.contains("mean_iou") ? b["mean_iou"].dump() : "") << ',';
      f << (b.contains("best_iou") ? b["best_iou"].dump() : "") << ',';
      f << (b.contains("solved_ratio") ? b["solved_ratio"].dump() : "") << '\n';
    }
  }
  if (report.contains("amortization_gap")) {
    std::ofstream f(dir / "gap.csv");
    f << "k,pass1,passk,gap_percent\n";
    const auto& g = report["amortization_gap"];
    f << g["k"].dump() << ',' << g["pass1"].dump() << ',' << g["passk"].dump() << ','
      << g["gap_percent"].dump() << '\n';
  }
}

void write_metrics_csv(const ordered_json& report, std::ostream& out) {
  out << "metric,value\n";
  for (const char* key :
       {"mean_iou", "median_iou", "solved_ratio", "fraction_below_tau_low"})
    if (report.contains(key)) out << key << ',' << report[key].dump() << '\n';
  if (report.contains("run_stats"))
    out << "valid_rate," << report["run_stats"]["valid_rate"].dump() << '\n';
  if (report.contains("pass_at_k"))
    for (const auto& [k, v] : report["pass_at_k"]["first_k"].items())
      out << "pass@" << k << ',' << v.dump() << '\n';
  if (report.contains("amortization_gap"))
    out << "amortization_gap_percent," << report["amortization_gap"]["gap_percent"].dump()
        << '\n';
}

int write_pipeline_outputs(const RunConfig& cfg, const LoadedRun& run,
                           const std::string& plan_desc,
                           std::span<const gf::sample::CandidateSet> sets,
                           const VerifyOutcome& verified) {
  const fs::path out = run.out;

  {
    std::ofstream f(out / "config.json");
    f << config_echo(cfg, plan_desc, run.gt_set).dump(2) << '\n';
  }
  {
    std::ofstream f(out / "candidates.jsonl");
    gf::sample::write_candidates_jsonl(sets, f);
  }
  {
    std::ofstream f(out / "verdicts.jsonl");
    for (const auto& v : verified.verdicts) f << gf::verify::verdict_to_json(v) << '\n';
  }

  gf::augment::BuildConfig build_cfg;
  build_cfg.resolution = cfg.resolution;
  build_cfg.renders_dir = out / "images";
  const gf::augment::DatasetManifest manifest =
      gf::augment::build_gift(verified.verdicts, sets, run.gt_set, build_cfg);
  {
    std::ofstream f(out / "manifest.jsonl");
    gf::augment::write_manifest_jsonl(manifest.pairs, f);
  }

  const gf::augment::SplitManifests splits =
      gf::augment::build_splits(verified.verdicts, sets, run.gt_set);
  {
    std::ofstream f(out / "splits" / "full.jsonl");
    gf::augment::write_manifest_jsonl(splits.full.pairs, f);
  }
  {
    std::ofstream f(out / "splits" / "fail.jsonl");
    gf::augment::write_manifest_jsonl(splits.fail.pairs, f);
  }
  {
    std::ofstream f(out / "splits" / "srs.jsonl");
    gf::augment::write_manifest_jsonl(splits.srs.pairs, f);
  }

  const gf::augment::DatasetManifest balanced = gf::augment::balance(manifest);
  {
    std::ofstream f(out / "manifest_balanced.jsonl");
    gf::augment::write_manifest_jsonl(balanced.pairs, f);
  }
  {
    ordered_json summary;
    summary["unbalanced"] = nlohmann::json::parse(gf::augment::summary_json(manifest));
    summary["balanced"] = nlohmann::json::parse(gf::augment::summary_json(balanced));
    std::ofstream f(out / "manifest_summary.json");
    f << summary.dump(2) << '\n';
  }

  const gf::metrics::ScoreMatrix matrix = matrix_from_verdicts(verified.verdicts, run.gt_set);
  const ordered_json report = metrics_report(cfg, verified.stats, matrix, run.gt_set);
  {
    std::ofstream f(out / "report.json");
    f << report.dump(2) << '\n';
  }
  {
    std::ofstream f(out / "metrics.csv");
    write_metrics_csv(report, f);
  }
  return kExitOk;
}

int cmd_pipeline(RunConfig cfg) {
  gf::set_workers(cfg.workers);
  if (!cfg.thresholds.valid()) return fail(kExitConfig, "thresholds must satisfy 0 < low < valid < match <= 1");
  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  auto plan = resolve_plan(cfg, &error);
  if (!plan) return fail(kExitConfig, error);
  if (!ensure_gt_images(run->gt_set, run->out, cfg, &error)) return fail(kExitConfig, error);

  SampleOutcome sampled = run_sampling(cfg, plan->plan, run->gt_set);
  if (sampled.exit_code != kExitOk) return fail(sampled.exit_code, sampled.error);

  VerifyOutcome verified = run_verification(cfg, run->gt_set, sampled.sets);
  if (verified.exit_code != kExitOk) return fail(verified.exit_code, verified.error);

  return write_pipeline_outputs(cfg, *run, plan->description, sampled.sets, verified);
}

int cmd_sample(RunConfig cfg) {
  gf::set_workers(cfg.workers);
  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  auto plan = resolve_plan(cfg, &error);
  if (!plan) return fail(kExitConfig, error);
  if (!ensure_gt_images(run->gt_set, run->out, cfg, &error)) return fail(kExitConfig, error);

  SampleOutcome sampled = run_sampling(cfg, plan->plan, run->gt_set);
  if (sampled.exit_code != kExitOk) return fail(sampled.exit_code, sampled.error);
  {
    std::ofstream f(run->out / "config.json");
    f << config_echo(cfg, plan->description, run->gt_set).dump(2) << '\n';
  }
  std::ofstream f(run->out / "candidates.jsonl");
  gf::sample::write_candidates_jsonl(sampled.sets, f);
  return kExitOk;
}

std::optional<std::vector<gf::sample::CandidateSet>> load_run_candidates(
    const fs::path& out, std::string* error) {
  std::ifstream in(out / "candidates.jsonl");
  if (!in) {
    *error = "missing " + (out / "candidates.jsonl").string();
    return std::nullopt;
  }
  auto sets = gf::sample::read_candidates_jsonl(in);
  if (!sets) *error = "malformed candidates.jsonl";
  return sets;
}

std::optional<std::vector<gf::verify::Verdict>> load_run_verdicts(const fs::path& out,
                                                                  std::string* error) {
  std::ifstream in(out / "verdicts.jsonl");
  if (!in) {
    *error = "missing " + (out / "verdicts.jsonl").string();
    return std::nullopt;
  }
  std::vector<gf::verify::Verdict> verdicts;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto v = gf::verify::verdict_from_json(line);
    if (!v) {
      *error = "malformed verdicts.jsonl";
      return std::nullopt;
    }
    verdicts.push_back(std::move(*v));
  }
  return verdicts;
}

int cmd_verify(RunConfig cfg) {
  gf::set_workers(cfg.workers);
  if (!cfg.thresholds.valid()) return fail(kExitConfig, "invalid thresholds");
  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  auto sets = load_run_candidates(run->out, &error);
  if (!sets) return fail(kExitConfig, error);

  VerifyOutcome verified = run_verification(cfg, run->gt_set, *sets);
  if (verified.exit_code != kExitOk) return fail(verified.exit_code, verified.error);
  std::ofstream f(run->out / "verdicts.jsonl");
  for (const auto& v : verified.verdicts) f << gf::verify::verdict_to_json(v) << '\n';
  return kExitOk;
}

int cmd_render(RunConfig cfg, bool png) {
  gf::set_workers(cfg.workers);
  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  if (!ensure_gt_images(run->gt_set, run->out, cfg, &error, png)) return fail(kExitConfig, error);

  // Render FDA-band candidates when a verdict file is present; per-item
  // failures are recorded, not fatal.
  auto verdicts = load_run_verdicts(run->out, &error);
  ordered_json log = ordered_json::array();
  if (verdicts) {
    auto sets = load_run_candidates(run->out, &error);
    if (!sets) return fail(kExitConfig, error);
    std::map<std::string, std::map<int, const std::string*>> texts;
    for (const auto& set : *sets)
      for (const auto& cand : set.candidates)
        texts[set.input_id][cand.candidate_id] = &cand.text;
    for (const auto& v : *verdicts) {
      if (v.band != gf::verify::Band::Fda) continue;
      ordered_json item;
      item["input_id"] = v.input_id;
      item["candidate_id"] = v.candidate_id;
      const auto* text = texts.count(v.input_id) && texts[v.input_id].count(v.candidate_id)
                             ? texts[v.input_id][v.candidate_id]
                             : nullptr;
      if (!text) {
        item["error"] = "candidate text not found";
        log.push_back(std::move(item));
        continue;
      }
      const auto parsed = gf::dsl::parse(*text);
      if (std::holds_alternative<gf::dsl::ParseError>(parsed)) {
        item["error"] = "candidate does not parse";
        log.push_back(std::move(item));
        continue;
      }
      const auto executed =
          gf::exec::execute(std::get<gf::dsl::CadProgram>(parsed), cfg.resolution);
      if (!std::holds_alternative<gf::VoxelSolid>(executed)) {
        item["error"] = "candidate does not execute to a solid";
        log.push_back(std::move(item));
        continue;
      }
      const auto image =
          gf::render::render(std::get<gf::VoxelSolid>(executed), gf::render::RenderSpec{});
      if (!std::holds_alternative<gf::render::Image>(image)) {
        item["error"] = "empty solid";
        log.push_back(std::move(item));
        continue;
      }
      const std::string name =
          "fda_" + v.input_id + "_c" + std::to_string(v.candidate_id) + ".pgm";
      if (!gf::render::write_pgm_file(std::get<gf::render::Image>(image),
                                      run->out / "images" / name)) {
        item["error"] = "write failed";
        log.push_back(std::move(item));
        continue;
      }
      if (png)
        gf::render::write_png_file(
            std::get<gf::render::Image>(image),
            run->out / "images" /
                ("fda_" + v.input_id + "_c" + std::to_string(v.candidate_id) + ".png"));
      item["image"] = "images/" + name;
      log.push_back(std::move(item));
    }
  }
  std::ofstream f(run->out / "render_log.json");
  f << log.dump(2) << '\n';
  return kExitOk;
}

int cmd_augment(RunConfig cfg) {
  gf::set_workers(cfg.workers);
  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  if (!ensure_gt_images(run->gt_set, run->out, cfg, &error)) return fail(kExitConfig, error);
  auto sets = load_run_candidates(run->out, &error);
  if (!sets) return fail(kExitConfig, error);
  auto verdicts = load_run_verdicts(run->out, &error);
  if (!verdicts) return fail(kExitConfig, error);

  gf::augment::BuildConfig build_cfg;
  build_cfg.resolution = cfg.resolution;
  build_cfg.renders_dir = run->out / "images";
  const auto manifest = gf::augment::build_gift(*verdicts, *sets, run->gt_set, build_cfg);
  {
    std::ofstream f(run->out / "manifest.jsonl");
    gf::augment::write_manifest_jsonl(manifest.pairs, f);
  }
  const auto splits = gf::augment::build_splits(*verdicts, *sets, run->gt_set);
  {
    std::ofstream f(run->out / "splits" / "full.jsonl");
    gf::augment::write_manifest_jsonl(splits.full.pairs, f);
  }
  {
    std::ofstream f(run->out / "splits" / "fail.jsonl");
    gf::augment::write_manifest_jsonl(splits.fail.pairs, f);
  }
  {
    std::ofstream f(run->out / "splits" / "srs.jsonl");
    gf::augment::write_manifest_jsonl(splits.srs.pairs, f);
  }
  const auto balanced = gf::augment::balance(manifest);
  {
    std::ofstream f(run->out / "manifest_balanced.jsonl");
    gf::augment::write_manifest_jsonl(balanced.pairs, f);
  }
  {
    ordered_json summary;
    summary["unbalanced"] = nlohmann::json::parse(gf::augment::summary_json(manifest));
    summary["balanced"] = nlohmann::json::parse(gf::augment::summary_json(balanced));
    std::ofstream f(run->out / "manifest_summary.json");
    f << summary.dump(2) << '\n';
  }
  return kExitOk;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

int cmd_metrics(RunConfig cfg, const std::string& delta_csv, const std::string& method_a,
                const std::string& method_b, const std::string& gap_csv, bool figures) {
  gf::set_workers(cfg.workers);

  // Curve-table modes operate on already-aggregated values.
  if (!delta_csv.empty()) {
    const auto rows = read_csv(delta_csv);
    if (rows.size() < 2) return fail(kExitConfig, "delta CSV needs a header and data rows");
    const std::vector<std::string>* row_a = nullptr;
    const std::vector<std::string>* row_b = nullptr;
    for (const auto& row : rows) {
      if (row.empty()) continue;
      if (row[0] == method_a) row_a = &row;
      if (row[0] == method_b) row_b = &row;
    }
    if (!row_a || !row_b)
      return fail(kExitConfig, "methods not found in CSV: " + method_a + ", " + method_b);
    std::cout << "k,delta_percent\n";
    for (std::size_t i = 1; i < std::min(row_a->size(), row_b->size()); ++i) {
      const double a = std::stod((*row_a)[i]);
      const double b = std::stod((*row_b)[i]);
      std::cout << rows[0][i] << ',' << format_fixed(gf::metrics::delta_percent_from_values(a, b), 2)
                << '\n';
    }
    return kExitOk;
  }

  if (!gap_csv.empty()) {
    const auto rows = read_csv(gap_csv);
    if (rows.size() < 2) return fail(kExitConfig, "gap CSV needs a header and data rows");
    std::cout << "method,gap_percent\n";
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() < 3) continue;
      const double pass1 = std::stod(rows[r][1]);
      const double passk = std::stod(rows[r].back());
      std::cout << rows[r][0] << ','
                << format_fixed(gf::metrics::gap_percent_from_values(pass1, passk), 1) << '\n';
    }
    return kExitOk;
  }

  std::string error;
  auto run = prepare_run(cfg, &error);
  if (!run) return fail(kExitConfig, error);
  auto verdicts = load_run_verdicts(run->out, &error);
  if (!verdicts) return fail(kExitConfig, error);

  gf::verify::RunStats stats;
  stats.inputs = static_cast<std::int64_t>(run->gt_set.size());
  stats.candidates = static_cast<std::int64_t>(verdicts->size());
  std::map<std::string, bool> solved;
  for (const auto& v : *verdicts) {
    switch (v.error) {
      case gf::verify::ErrorKind::FailedGen:
        ++stats.failed_gen;
        break;
      case gf::verify::ErrorKind::FailedExec:
        ++stats.failed_exec;
        break;
      case gf::verify::ErrorKind::NotSolid:
        ++stats.not_solid;
        break;
      case gf::verify::ErrorKind::None:
        break;
    }
    switch (v.band) {
      case gf::verify::Band::Match:
        ++stats.band_match;
        break;
      case gf::verify::Band::Srs:
        ++stats.band_srs;
        break;
      case gf::verify::Band::Fda:
        ++stats.band_fda;
        break;
      case gf::verify::Band::Reject:
        ++stats.band_reject;
        break;
    }
    if (v.score && *v.score >= cfg.thresholds.tau_valid) solved[v.input_id] = true;
  }
  for (const auto& gt : run->gt_set)
    if (!solved.count(gt.input_id)) ++stats.unsolved_inputs;

  const gf::metrics::ScoreMatrix matrix = matrix_from_verdicts(*verdicts, run->gt_set);
  const ordered_json report = metrics_report(cfg, stats, matrix, run->gt_set);
  {
    std::ofstream f(run->out / "report.json");
    f << report.dump(2) << '\n';
  }
  {
    std::ofstream f(run->out / "metrics.csv");
    write_metrics_csv(report, f);
  }
  if (figures) write_figure_csvs(report, run->out / "csv");
  return kExitOk;
}

int cmd_plan(const std::string& out_file) {
  const std::string text = gf::sample::plan_to_json(gf::sample::plan_default());
  if (out_file.empty()) {
    std::cout << text << '\n';
    return kExitOk;
  }
  if (!gf::dataset::write_file(out_file, text + "\n"))
    return fail(kExitConfig, "cannot write " + out_file);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"giftforge: verifier-guided data curation for image-to-CAD program synthesis"};
  app.require_subcommand(1);

  RunConfig cfg;

  // --config JSON applies below defaults but under explicit flags.
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    const auto text = gf::dataset::read_file(config_path);
    if (!text) return fail(kExitConfig, "cannot read config file " + config_path);
    const auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded()) return fail(kExitConfig, "config file is not valid JSON");
    apply_config_file(cfg, j);
  }
  if (const int env = gf::env_workers(); env > 0) cfg.workers = env;

  std::string config_flag;  // consumed above; registered so CLI11 accepts it
  app.add_option("--config", config_flag, "JSON config file")->expected(1);

  auto* pipeline = app.add_subcommand("pipeline", "sample, verify, render, augment, report");
  add_common_flags(pipeline, cfg);

  auto* sample_cmd = app.add_subcommand("sample", "produce candidates.jsonl");
  add_common_flags(sample_cmd, cfg);

  auto* verify_cmd = app.add_subcommand("verify", "score candidates.jsonl into verdicts.jsonl");
  add_common_flags(verify_cmd, cfg);

  auto* render_cmd = app.add_subcommand("render", "render ground-truth and FDA images");
  add_common_flags(render_cmd, cfg);
  bool render_png = false;
  render_cmd->add_flag("--png", render_png, "Also export PNG next to each PGM");

  auto* augment_cmd = app.add_subcommand("augment", "build manifests and splits from verdicts");
  add_common_flags(augment_cmd, cfg);

  auto* metrics_cmd = app.add_subcommand("metrics", "recompute the metrics report");
  add_common_flags(metrics_cmd, cfg);
  std::string delta_csv, gap_csv, method_a = "GIFT", method_b = "SFT";
  metrics_cmd->add_option("--delta-csv", delta_csv, "Curve CSV (method,k columns) for deltas");
  metrics_cmd->add_option("--method-a", method_a, "Numerator method for --delta-csv");
  metrics_cmd->add_option("--method-b", method_b, "Baseline method for --delta-csv");
  metrics_cmd->add_option("--gap-csv", gap_csv, "Curve CSV (method,pass1..passk) for gaps");
  bool figures = false;
  metrics_cmd->add_flag("--figures", figures, "Write per-figure CSVs under <out>/csv/");

  auto* plan_cmd = app.add_subcommand("plan", "emit the stock sampling plan");
  std::string plan_out;
  plan_cmd->add_option("--out-file", plan_out, "Write the plan here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (pipeline->parsed()) return cmd_pipeline(cfg);
  if (sample_cmd->parsed()) return cmd_sample(cfg);
  if (verify_cmd->parsed()) return cmd_verify(cfg);
  if (render_cmd->parsed()) return cmd_render(cfg, render_png);
  if (augment_cmd->parsed()) return cmd_augment(cfg);
  if (metrics_cmd->parsed())
    return cmd_metrics(cfg, delta_csv, method_a, method_b, gap_csv, figures);
  if (plan_cmd->parsed()) return cmd_plan(plan_out);
  return kExitUsage;
}
