#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "giftforge/dataset.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
  const std::string out_file = (fs::temp_directory_path() / "gf_cli_out.txt").string();
  const std::string cmd = std::string(GF_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(status);
  result.stdout_text = gf::dataset::read_file(out_file).value_or("");
  return result;
}

// A 5-input corpus keeps the CLI suite quick.
void copy_small_corpus(const fs::path& dst) {
  fs::create_directories(dst);
  for (const char* name :
       {"cube_unit.gcad", "lshape.gcad", "washer.gcad", "cross.gcad", "steps.gcad"})
    fs::copy_file(fs::path(GF_FIXTURES_DIR) / name, dst / name);
}

std::string slurp(const fs::path& p) { return gf::dataset::read_file(p).value_or(""); }

}  // namespace

TEST_CASE("plan subcommand emits the stock plan") {
  const auto result = run_cli("plan");
  CHECK(result.exit_code == 0);
  const auto j = nlohmann::json::parse(result.stdout_text, nullptr, false);
  REQUIRE_FALSE(j.is_discarded());
  CHECK(j["entries"].size() == 5);
  CHECK(j["entries"][0]["configs"].size() == 11);
}

TEST_CASE("missing ground-truth directory exits 2 with error JSON") {
  const auto result = run_cli("pipeline --gt /nonexistent_dir_xyz --out /tmp/gf_never");
  CHECK(result.exit_code == 2);
  CHECK(result.stdout_text.find("\"error\"") != std::string::npos);
}

TEST_CASE("unreachable http endpoint exits 3 after retries") {
  testutil::TempDir dir("cli_http");
  copy_small_corpus(dir.path / "gt");
  const auto result = run_cli("pipeline --gt " + (dir.path / "gt").string() + " --out " +
                              (dir.path / "run").string() +
                              " --source http --endpoint http://127.0.0.1:9 --budget 8");
  CHECK(result.exit_code == 3);
}

TEST_CASE("pipeline produces all artifacts and reruns byte-identically") {
  testutil::TempDir dir("cli_pipeline");
  copy_small_corpus(dir.path / "gt");
  const std::string common = "pipeline --gt " + (dir.path / "gt").string() +
                             " --budget 8 --seed 7 --sigma 0.1 --p-drop 0.1 --p-syntax 0.1";

  const auto first = run_cli(common + " --out " + (dir.path / "run_a").string());
  REQUIRE_MESSAGE(first.exit_code == 0, first.stdout_text);

  for (const char* artifact :
       {"config.json", "candidates.jsonl", "verdicts.jsonl", "manifest.jsonl",
        "manifest_balanced.jsonl", "manifest_summary.json", "report.json", "metrics.csv",
        "splits/full.jsonl", "splits/fail.jsonl", "splits/srs.jsonl"})
    CHECK_MESSAGE(fs::exists(dir.path / "run_a" / artifact), artifact);

  const auto second = run_cli(common + " --out " + (dir.path / "run_b").string());
  REQUIRE(second.exit_code == 0);
  for (const char* artifact :
       {"config.json", "candidates.jsonl", "verdicts.jsonl", "manifest.jsonl",
        "manifest_balanced.jsonl", "report.json"})
    CHECK_MESSAGE(slurp(dir.path / "run_a" / artifact) == slurp(dir.path / "run_b" / artifact),
                  "artifact differs: " << artifact);

  // every manifest image_ref resolves against the run dir
  std::ifstream manifest(dir.path / "run_a" / "manifest.jsonl");
  for (std::string line; std::getline(manifest, line);) {
    const auto j = nlohmann::json::parse(line);
    const std::string ref = j["image_ref"].get<std::string>();
    const fs::path resolved =
        ref.rfind("images/", 0) == 0 ? dir.path / "run_a" / ref : fs::path(ref);
    CHECK_MESSAGE(fs::exists(resolved), "unresolved image_ref " << ref);
  }
}

TEST_CASE("stage commands composed manually equal the pipeline output") {
  testutil::TempDir dir("cli_stages");
  copy_small_corpus(dir.path / "gt");
  const std::string flags = " --gt " + (dir.path / "gt").string() +
                            " --budget 8 --seed 11 --sigma 0.08 --p-drop 0.15 --p-syntax 0.05";

  const auto pipe = run_cli("pipeline" + flags + " --out " + (dir.path / "whole").string());
  REQUIRE_MESSAGE(pipe.exit_code == 0, pipe.stdout_text);

  const std::string staged_out = " --out " + (dir.path / "staged").string();
  REQUIRE(run_cli("sample" + flags + staged_out).exit_code == 0);
  REQUIRE(run_cli("verify" + flags + staged_out).exit_code == 0);
  REQUIRE(run_cli("render" + flags + staged_out).exit_code == 0);
  REQUIRE(run_cli("augment" + flags + staged_out).exit_code == 0);
  REQUIRE(run_cli("metrics" + flags + staged_out).exit_code == 0);

  for (const char* artifact :
       {"candidates.jsonl", "verdicts.jsonl", "manifest.jsonl", "manifest_balanced.jsonl",
        "manifest_summary.json", "report.json", "splits/full.jsonl", "splits/fail.jsonl",
        "splits/srs.jsonl"})
    CHECK_MESSAGE(slurp(dir.path / "whole" / artifact) == slurp(dir.path / "staged" / artifact),
                  "stage composition differs on " << artifact);
}

TEST_CASE("render --png and metrics --figures emit their extras") {
  testutil::TempDir dir("cli_extras");
  copy_small_corpus(dir.path / "gt");
  const std::string flags = " --gt " + (dir.path / "gt").string() + " --budget 8 --seed 21" +
                            " --out " + (dir.path / "run").string();
  REQUIRE(run_cli("sample" + flags).exit_code == 0);
  REQUIRE(run_cli("verify" + flags).exit_code == 0);
  REQUIRE(run_cli("render --png" + flags).exit_code == 0);
  CHECK(fs::exists(dir.path / "run" / "images" / "gt_cube_unit.png"));
  REQUIRE(run_cli("metrics --figures" + flags).exit_code == 0);
  for (const char* f : {"passk.csv", "ecdf.csv", "buckets_tokens.csv", "buckets_ops.csv"})
    CHECK_MESSAGE(fs::exists(dir.path / "run" / "csv" / f), f);
}

TEST_CASE("render and augment record unrenderable FDA candidates without failing") {
  testutil::TempDir dir("cli_notsolid");
  copy_small_corpus(dir.path / "gt");
  const fs::path run = dir.path / "run";
  fs::create_directories(run);

  // Handcrafted artifacts: an FDA-band verdict whose candidate executes to an
  // empty solid, next to a healthy one.
  std::ofstream(run / "candidates.jsonl")
      << R"({"input_id":"cube_unit","candidate_id":0,"config_id":"c","budget_n":2,"seed":0,)"
      << R"("text":"rect 1 1\nextrude 1\nrect 1 1\nextrude 1\ncut\n"})" << "\n"
      << R"({"input_id":"cube_unit","candidate_id":1,"config_id":"c","budget_n":2,"seed":0,)"
      << R"("text":"rect 1.3 1\nextrude 0.8\n"})" << "\n";
  std::ofstream(run / "verdicts.jsonl")
      << R"({"input_id":"cube_unit","candidate_id":0,"score":0.7,"band":"FDA","error":"none",)"
      << R"("budget_n":2,"config_id":"c","exact_text_match":false})" << "\n"
      << R"({"input_id":"cube_unit","candidate_id":1,"score":0.7,"band":"FDA","error":"none",)"
      << R"("budget_n":2,"config_id":"c","exact_text_match":false})" << "\n";

  const std::string flags =
      " --gt " + (dir.path / "gt").string() + " --out " + run.string();
  const auto rendered = run_cli("render" + flags);
  CHECK(rendered.exit_code == 0);
  const auto log = nlohmann::json::parse(slurp(run / "render_log.json"));
  REQUIRE(log.size() == 2);
  CHECK(log[0].contains("error"));   // candidate 0 cannot re-execute
  CHECK(log[1].contains("image"));   // candidate 1 renders fine

  const auto augmented = run_cli("augment" + flags);
  CHECK(augmented.exit_code == 0);
  const auto summary = nlohmann::json::parse(slurp(run / "manifest_summary.json"));
  CHECK(summary["unbalanced"]["skipped_renders"] == 1);
  CHECK(summary["unbalanced"]["count_fda"] == 1);
}

TEST_CASE("metrics --delta-csv reproduces printed-table deltas") {
  testutil::TempDir dir("cli_delta");
  const fs::path csv = dir.path / "table.csv";
  std::ofstream(csv) << "method,1,2,10\n"
                     << "SFT,0.698,0.725,0.807\n"
                     << "GIFT,0.779,0.802,0.819\n";
  const auto result = run_cli("metrics --delta-csv " + csv.string() +
                              " --method-a GIFT --method-b SFT");
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("1,11.60") != std::string::npos);
  CHECK(result.stdout_text.find("2,10.62") != std::string::npos);
  CHECK(result.stdout_text.find("10,1.49") != std::string::npos);
}

TEST_CASE("metrics --gap-csv reproduces printed-table gaps") {
  testutil::TempDir dir("cli_gap");
  const fs::path csv = dir.path / "gaps.csv";
  std::ofstream(csv) << "method,pass1,pass5,pass10\n"
                     << "GIFT-REJECT,0.732,0.788,0.812\n"
                     << "GIFT-FAIL,0.761,0.792,0.806\n";
  const auto result = run_cli("metrics --gap-csv " + csv.string());
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("GIFT-REJECT,10.9") != std::string::npos);
  CHECK(result.stdout_text.find("GIFT-FAIL,5.9") != std::string::npos);
}

TEST_CASE("config file values load and flags override them") {
  testutil::TempDir dir("cli_config");
  copy_small_corpus(dir.path / "gt");
  const fs::path cfg = dir.path / "config.json";
  std::ofstream(cfg) << R"({"seed": 5, "budget": 8, "gt_dir": ")"
                     << (dir.path / "gt").generic_string() << R"("})";

  const auto result = run_cli("--config " + cfg.string() + " pipeline --out " +
                              (dir.path / "run").string());
  REQUIRE_MESSAGE(result.exit_code == 0, result.stdout_text);
  const auto echo = nlohmann::json::parse(slurp(dir.path / "run" / "config.json"));
  CHECK(echo["seed"] == 5);

  const auto overridden = run_cli("--config " + cfg.string() + " pipeline --seed 9 --out " +
                                  (dir.path / "run2").string());
  REQUIRE(overridden.exit_code == 0);
  const auto echo2 = nlohmann::json::parse(slurp(dir.path / "run2" / "config.json"));
  CHECK(echo2["seed"] == 9);
}

TEST_CASE("GIFTFORGE_WORKERS does not change artifact bytes") {
  testutil::TempDir dir("cli_workers");
  copy_small_corpus(dir.path / "gt");
  const std::string common = "pipeline --gt " + (dir.path / "gt").string() +
                             " --budget 8 --seed 3";

  ::setenv("GIFTFORGE_WORKERS", "1", 1);
  const auto one = run_cli(common + " --out " + (dir.path / "w1").string());
  ::setenv("GIFTFORGE_WORKERS", "8", 1);
  const auto eight = run_cli(common + " --out " + (dir.path / "w8").string());
  ::unsetenv("GIFTFORGE_WORKERS");
  REQUIRE(one.exit_code == 0);
  REQUIRE(eight.exit_code == 0);
  for (const char* artifact : {"verdicts.jsonl", "manifest.jsonl", "report.json"})
    CHECK(slurp(dir.path / "w1" / artifact) == slurp(dir.path / "w8" / artifact));
}
