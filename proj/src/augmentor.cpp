#include "giftforge/augmentor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "giftforge/executor.hpp"
#include "giftforge/rng.hpp"

namespace gf::augment {

using ordered_json = nlohmann::ordered_json;

namespace {

struct VerdictIndex {
  // Per input, verdicts in candidate order plus a candidate text lookup.
  struct InputRecord {
    const GtEntry* gt = nullptr;
    std::vector<const verify::Verdict*> verdicts;
    std::map<int, const std::string*> texts;
  };
  std::vector<std::string> input_order;
  std::map<std::string, InputRecord> by_input;
};

VerdictIndex index_inputs(std::span<const verify::Verdict> verdicts,
                          std::span<const sample::CandidateSet> candidates,
                          std::span<const GtEntry> gt_set) {
  VerdictIndex idx;
  for (const GtEntry& gt : gt_set) {
    idx.input_order.push_back(gt.input_id);
    idx.by_input[gt.input_id].gt = &gt;
  }
  for (const sample::CandidateSet& set : candidates) {
    auto it = idx.by_input.find(set.input_id);
    if (it == idx.by_input.end()) continue;
    for (const sample::Candidate& cand : set.candidates)
      it->second.texts[cand.candidate_id] = &cand.text;
  }
  for (const verify::Verdict& v : verdicts) {
    auto it = idx.by_input.find(v.input_id);
    if (it != idx.by_input.end()) it->second.verdicts.push_back(&v);
  }
  for (auto& [id, record] : idx.by_input)
    std::sort(record.verdicts.begin(), record.verdicts.end(),
              [](const verify::Verdict* a, const verify::Verdict* b) {
                return a->candidate_id < b->candidate_id;
              });
  return idx;
}

std::string canonical_of(const std::string& text) {
  const dsl::ParseResult parsed = dsl::parse(text);
  if (std::holds_alternative<dsl::ParseError>(parsed)) return text;
  return dsl::serialize(std::get<dsl::CadProgram>(parsed));
}

}  // namespace

DatasetManifest build_gift(std::span<const verify::Verdict> verdicts,
                           std::span<const sample::CandidateSet> candidates,
                           std::span<const GtEntry> gt_set, const BuildConfig& cfg) {
  const VerdictIndex idx = index_inputs(verdicts, candidates, gt_set);
  DatasetManifest manifest;

  for (const std::string& input_id : idx.input_order) {
    const auto& record = idx.by_input.at(input_id);
    const GtEntry& gt = *record.gt;

    manifest.pairs.push_back({gt.image_ref, gt.program_text, kSplitSft, input_id,
                              kGroundTruthCandidateId, 1.0});
    ++manifest.count_sft;

    std::set<std::string> seen_srs_texts;
    for (const verify::Verdict* v : record.verdicts) {
      if (v->band == verify::Band::Srs) {
        const auto text_it = record.texts.find(v->candidate_id);
        if (text_it == record.texts.end()) continue;
        const std::string canonical = canonical_of(*text_it->second);
        if (!seen_srs_texts.insert(canonical).second) continue;
        manifest.pairs.push_back(
            {gt.image_ref, *text_it->second, kSplitSrs, input_id, v->candidate_id, v->score});
        ++manifest.count_srs;
      } else if (v->band == verify::Band::Fda) {
        const auto text_it = record.texts.find(v->candidate_id);
        if (text_it == record.texts.end()) continue;
        // The band proved the candidate executes; re-run it for the render.
        const dsl::ParseResult parsed = dsl::parse(*text_it->second);
        if (std::holds_alternative<dsl::ParseError>(parsed)) {
          ++manifest.skipped_renders;
          continue;
        }
        const exec::ExecResult executed =
            exec::execute(std::get<dsl::CadProgram>(parsed), cfg.resolution);
        if (!std::holds_alternative<VoxelSolid>(executed)) {
          ++manifest.skipped_renders;
          continue;
        }
        const render::RenderResult image =
            render::render(std::get<VoxelSolid>(executed), cfg.render_spec);
        if (!std::holds_alternative<render::Image>(image)) {
          ++manifest.skipped_renders;
          continue;
        }
        const std::string name =
            "fda_" + input_id + "_c" + std::to_string(v->candidate_id) + ".pgm";
        if (!render::write_pgm_file(std::get<render::Image>(image), cfg.renders_dir / name)) {
          ++manifest.skipped_renders;
          continue;
        }
        manifest.pairs.push_back({cfg.image_ref_prefix + name, gt.program_text, kSplitFda,
                                  input_id, v->candidate_id, v->score});
        ++manifest.count_fda;
      }
    }
  }
  return manifest;
}

SplitManifests build_splits(std::span<const verify::Verdict> verdicts,
                            std::span<const sample::CandidateSet> candidates,
                            std::span<const GtEntry> gt_set) {
  const VerdictIndex idx = index_inputs(verdicts, candidates, gt_set);
  SplitManifests out;

  for (const std::string& input_id : idx.input_order) {
    const auto& record = idx.by_input.at(input_id);
    const GtEntry& gt = *record.gt;

    // Scored candidates sorted by descending score, candidate_id breaking
    // ties.
    std::vector<const verify::Verdict*> scored;
    for (const verify::Verdict* v : record.verdicts)
      if (v->score) scored.push_back(v);
    std::sort(scored.begin(), scored.end(),
              [](const verify::Verdict* a, const verify::Verdict* b) {
                if (*a->score != *b->score) return *a->score > *b->score;
                return a->candidate_id < b->candidate_id;
              });

    auto text_of = [&](const verify::Verdict* v) -> const std::string* {
      const auto it = record.texts.find(v->candidate_id);
      return it == record.texts.end() ? nullptr : it->second;
    };

    // FULL: top ceil(0.1 * K) among candidates with score > 0.5.
    const std::size_t k_total = record.verdicts.size();
    if (k_total > 0) {
      const std::size_t keep =
          static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(k_total)));
      std::size_t taken = 0;
      for (const verify::Verdict* v : scored) {
        if (taken >= keep) break;
        if (*v->score <= 0.5) break;
        if (const std::string* text = text_of(v)) {
          out.full.pairs.push_back({gt.image_ref, *text, kSplitFull, input_id, v->candidate_id,
                                    v->score});
          ++taken;
        }
      }
    }

    // FAIL: the single best candidate of inputs whose max score < 0.9.
    if (!scored.empty() && *scored.front()->score < 0.9) {
      if (const std::string* text = text_of(scored.front()))
        out.fail.pairs.push_back({gt.image_ref, *text, kSplitFail, input_id,
                                  scored.front()->candidate_id, scored.front()->score});
    }

    // SRS: ground truth plus the top-1 candidate strictly inside (0.9, 0.99),
    // excluding exact text duplicates of the ground truth.
    out.srs.pairs.push_back(
        {gt.image_ref, gt.program_text, kSplitSrs, input_id, kGroundTruthCandidateId, 1.0});
    for (const verify::Verdict* v : scored) {
      if (!(*v->score > 0.9 && *v->score < 0.99)) continue;
      const std::string* text = text_of(v);
      if (!text) continue;
      if (canonical_of(*text) == gt.canonical_text) continue;
      out.srs.pairs.push_back({gt.image_ref, *text, kSplitSrs, input_id, v->candidate_id,
                               v->score});
      break;
    }
  }
  return out;
}

DatasetManifest balance(const DatasetManifest& manifest, double bin_width,
                        std::optional<long> cap) {
  constexpr double kLow = 0.5;
  constexpr double kHigh = 1.0;
  const int nbins = static_cast<int>(std::lround((kHigh - kLow) / bin_width));

  auto bin_of = [&](const AugmentedPair& p) -> int {
    if (!p.score || *p.score < kLow) return -1;  // unbinned, never dropped
    const int b = static_cast<int>((*p.score - kLow) / bin_width);
    return std::min(b, nbins - 1);
  };

  std::vector<std::vector<std::size_t>> bins(nbins);
  for (std::size_t i = 0; i < manifest.pairs.size(); ++i) {
    const int b = bin_of(manifest.pairs[i]);
    if (b >= 0) bins[b].push_back(i);
  }

  long cap_value;
  if (cap) {
    cap_value = *cap;
  } else {
    std::vector<long> counts;
    for (const auto& bin : bins)
      if (!bin.empty()) counts.push_back(static_cast<long>(bin.size()));
    if (counts.empty()) {
      cap_value = 0;
    } else {
      std::sort(counts.begin(), counts.end());
      cap_value = counts[counts.size() / 2];
    }
  }

  std::vector<bool> keep(manifest.pairs.size(), true);
  DatasetManifest out;
  out.skipped_renders = manifest.skipped_renders;
  for (int b = 0; b < nbins; ++b) {
    BalanceBin report;
    report.lo = kLow + b * bin_width;
    report.hi = kLow + (b + 1) * bin_width;
    auto& members = bins[b];
    if (static_cast<long>(members.size()) > cap_value) {
      std::sort(members.begin(), members.end(), [&](std::size_t lhs, std::size_t rhs) {
        const AugmentedPair& a = manifest.pairs[lhs];
        const AugmentedPair& c = manifest.pairs[rhs];
        const std::uint64_t ha =
            mix_hash(fnv1a64(a.input_id), static_cast<std::uint64_t>(a.candidate_id));
        const std::uint64_t hc =
            mix_hash(fnv1a64(c.input_id), static_cast<std::uint64_t>(c.candidate_id));
        if (ha != hc) return ha < hc;
        return lhs < rhs;
      });
      for (std::size_t i = static_cast<std::size_t>(cap_value); i < members.size(); ++i)
        keep[members[i]] = false;
      report.kept = cap_value;
      report.dropped = static_cast<long>(members.size()) - cap_value;
    } else {
      report.kept = static_cast<long>(members.size());
    }
    out.balance_report.push_back(report);
  }

  for (std::size_t i = 0; i < manifest.pairs.size(); ++i) {
    if (!keep[i]) continue;
    const AugmentedPair& p = manifest.pairs[i];
    out.pairs.push_back(p);
    if (p.split == kSplitSft)
      ++out.count_sft;
    else if (p.split == kSplitSrs)
      ++out.count_srs;
    else if (p.split == kSplitFda)
      ++out.count_fda;
  }
  return out;
}

void write_manifest_jsonl(std::span<const AugmentedPair> pairs, std::ostream& out) {
  for (const AugmentedPair& p : pairs) {
    ordered_json j;
    j["image_ref"] = p.image_ref;
    j["program"] = p.program_text;
    j["split"] = p.split;
    j["input_id"] = p.input_id;
    j["candidate_id"] = p.candidate_id;
    if (p.score) j["score"] = *p.score;
    out << j.dump() << '\n';
  }
}

std::optional<std::vector<AugmentedPair>> read_manifest_jsonl(std::istream& in) {
  std::vector<AugmentedPair> pairs;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    try {
      AugmentedPair p;
      p.image_ref = j.at("image_ref").get<std::string>();
      p.program_text = j.at("program").get<std::string>();
      p.split = j.at("split").get<std::string>();
      p.input_id = j.at("input_id").get<std::string>();
      p.candidate_id = j.at("candidate_id").get<int>();
      if (j.contains("score")) p.score = j.at("score").get<double>();
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }
  return pairs;
}

std::string summary_json(const DatasetManifest& manifest) {
  ordered_json j;
  j["pairs"] = manifest.pairs.size();
  j["count_sft"] = manifest.count_sft;
  j["count_srs"] = manifest.count_srs;
  j["count_fda"] = manifest.count_fda;
  j["skipped_renders"] = manifest.skipped_renders;
  j["balance_report"] = ordered_json::array();
  for (const BalanceBin& bin : manifest.balance_report)
    j["balance_report"].push_back(
        {{"lo", bin.lo}, {"hi", bin.hi}, {"kept", bin.kept}, {"dropped", bin.dropped}});
  return j.dump(2);
}

}  // namespace gf::augment
