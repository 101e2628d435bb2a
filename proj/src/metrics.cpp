#include "giftforge/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gf::metrics {
namespace {

// Exact expectation of the maximum of a uniformly random k-subset. Weights
// C(i-1, k-1) / C(n, k) are built by recurrence to stay in range.
double subset_exact_row(std::vector<double> scores, int k) {
  const int n = static_cast<int>(scores.size());
  std::sort(scores.begin(), scores.end());
  // w_i = C(i-1, k-1) / C(n, k) for i = k..n (1-based); start at i = k where
  // w_k = C(k-1,k-1)/C(n,k) = 1/C(n,k), then
  // w_{i+1} = w_i * i / (i - k + 1).
  double w = 1.0;
  for (int j = 0; j < k; ++j) w *= static_cast<double>(k - j) / static_cast<double>(n - j);
  // w now equals C(n-k, 0)... specifically k!/(n..n-k+1) = 1/C(n,k) * k!/k! :
  // w = k*(k-1)*...*1 / (n*(n-1)*...*(n-k+1)) = 1/C(n,k).
  double acc = 0.0;
  for (int i = k; i <= n; ++i) {
    acc += scores[i - 1] * w;
    w *= static_cast<double>(i) / static_cast<double>(i - k + 1);
  }
  return acc;
}

}  // namespace

std::variant<double, InsufficientSamples> pass_at_k(const ScoreMatrix& m, int k,
                                                    PassKEstimator estimator) {
  if (k < 1) return InsufficientSamples{"k must be at least 1"};
  if (m.rows.empty()) return InsufficientSamples{"score matrix is empty"};
  double total = 0.0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const auto& row = m.rows[r];
    if (static_cast<int>(row.size()) < k)
      return InsufficientSamples{"input " + std::to_string(r) + " has " +
                                 std::to_string(row.size()) + " samples, needs " +
                                 std::to_string(k)};
    if (estimator == PassKEstimator::FirstK) {
      double best = row[0];
      for (int i = 1; i < k; ++i) best = std::max(best, row[i]);
      total += best;
    } else {
      total += subset_exact_row(row, k);
    }
  }
  return total / static_cast<double>(m.rows.size());
}

double gap_percent_from_values(double pass1, double passk) {
  return 100.0 * (passk - pass1) / pass1;
}

std::variant<AmortizationGap, InsufficientSamples> amortization_gap(const ScoreMatrix& m, int k,
                                                                    PassKEstimator estimator) {
  const auto p1 = pass_at_k(m, 1, estimator);
  if (std::holds_alternative<InsufficientSamples>(p1))
    return std::get<InsufficientSamples>(p1);
  const auto pk = pass_at_k(m, k, estimator);
  if (std::holds_alternative<InsufficientSamples>(pk))
    return std::get<InsufficientSamples>(pk);
  AmortizationGap gap;
  gap.pass1 = std::get<double>(p1);
  gap.passk = std::get<double>(pk);
  gap.gap_percent = gap_percent_from_values(gap.pass1, gap.passk);
  return gap;
}

double delta_percent_from_values(double a, double b) { return 100.0 * (a - b) / b; }

std::variant<double, InsufficientSamples, InputMismatch> delta_vs_baseline(
    const ScoreMatrix& a, const ScoreMatrix& b, int k, PassKEstimator estimator) {
  if (a.rows.size() != b.rows.size())
    return InputMismatch{"matrices cover different input counts"};
  if (!a.input_ids.empty() && !b.input_ids.empty() && a.input_ids != b.input_ids)
    return InputMismatch{"matrices cover different input sets"};
  const auto pa = pass_at_k(a, k, estimator);
  if (std::holds_alternative<InsufficientSamples>(pa))
    return std::get<InsufficientSamples>(pa);
  const auto pb = pass_at_k(b, k, estimator);
  if (std::holds_alternative<InsufficientSamples>(pb))
    return std::get<InsufficientSamples>(pb);
  return delta_percent_from_values(std::get<double>(pa), std::get<double>(pb));
}

SelectionStats selection_stats(const ScoreMatrix& m, bool include_exact) {
  SelectionStats stats;
  double top10_sum = 0.0;
  double top1_sum = 0.0;
  for (const auto& row : m.rows) {
    std::vector<double> eligible;
    eligible.reserve(row.size());
    for (double s : row)
      if (include_exact || s < 0.99) eligible.push_back(s);
    if (eligible.empty()) continue;
    std::sort(eligible.begin(), eligible.end(), std::greater<>());
    const std::size_t keep =
        static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(eligible.size())));
    for (std::size_t i = 0; i < keep; ++i) {
      top10_sum += eligible[i];
      ++stats.top10_count;
    }
    top1_sum += eligible[0];
    ++stats.top1_count;
  }
  if (stats.top10_count > 0) stats.top10_mean = top10_sum / stats.top10_count;
  if (stats.top1_count > 0) stats.top1_mean = top1_sum / stats.top1_count;
  return stats;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> scores) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Last occurrence of each distinct value carries the cumulative fraction.
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

std::variant<std::vector<ComplexityBucket>, MissingProfile> complexity_buckets(
    const ScoreMatrix& m, std::span<const dsl::ComplexityProfile> profiles,
    std::span<const double> bucket_edges, ComplexityAxis axis) {
  if (profiles.size() != m.rows.size())
    return MissingProfile{"profile count does not match input count"};
  if (bucket_edges.size() < 2) return MissingProfile{"need at least two bucket edges"};

  std::vector<ComplexityBucket> buckets(bucket_edges.size() - 1);
  std::vector<double> mean_sum(buckets.size(), 0.0);
  std::vector<double> best_sum(buckets.size(), 0.0);
  std::vector<long> solved(buckets.size(), 0);

  for (std::size_t b = 0; b < buckets.size(); ++b) {
    buckets[b].lo = bucket_edges[b];
    buckets[b].hi = bucket_edges[b + 1];
  }

  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const double value = axis == ComplexityAxis::Tokens
                             ? static_cast<double>(profiles[r].token_count)
                             : static_cast<double>(profiles[r].op_count);
    int bucket = -1;
    for (std::size_t b = 0; b + 1 < bucket_edges.size(); ++b)
      if (value >= bucket_edges[b] && value < bucket_edges[b + 1]) {
        bucket = static_cast<int>(b);
        break;
      }
    if (bucket < 0) continue;
    const auto& row = m.rows[r];
    if (row.empty()) continue;
    double sum = 0.0;
    double best = row[0];
    for (double s : row) {
      sum += s;
      best = std::max(best, s);
    }
    ++buckets[bucket].inputs;
    mean_sum[bucket] += sum / static_cast<double>(row.size());
    best_sum[bucket] += best;
    if (best >= kSolvedThreshold) ++solved[bucket];
  }

  for (std::size_t b = 0; b < buckets.size(); ++b) {
    if (buckets[b].inputs == 0) continue;  // empty buckets stay absent
    const double n = static_cast<double>(buckets[b].inputs);
    buckets[b].mean_iou = mean_sum[b] / n;
    buckets[b].best_iou = best_sum[b] / n;
    buckets[b].solved_ratio = static_cast<double>(solved[b]) / n;
  }
  return buckets;
}

}  // namespace gf::metrics
