#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "giftforge/dsl.hpp"

namespace gf::metrics {

// Per-input ordered score lists; failures enter as 0. List lengths may vary
// per input.
struct ScoreMatrix {
  std::vector<std::string> input_ids;        // optional, parallel to rows when set
  std::vector<std::vector<double>> rows;
  std::string label;
};

enum class PassKEstimator { FirstK, SubsetExact };

struct InsufficientSamples {
  std::string message;
};
struct InputMismatch {
  std::string message;
};

// FIRST_K: mean over inputs of max of the first k scores. SUBSET_EXACT: exact
// expectation of the max over uniformly random k-subsets via order
// statistics, sum_i s_(i) * C(i-1, k-1) / C(n, k).
std::variant<double, InsufficientSamples> pass_at_k(const ScoreMatrix& m, int k,
                                                    PassKEstimator estimator);

struct AmortizationGap {
  double pass1 = 0.0;
  double passk = 0.0;
  double gap_percent = 0.0;
};

std::variant<AmortizationGap, InsufficientSamples> amortization_gap(
    const ScoreMatrix& m, int k, PassKEstimator estimator = PassKEstimator::FirstK);

// Gap from already-aggregated curve points: 100 * (passk - pass1) / pass1.
double gap_percent_from_values(double pass1, double passk);

std::variant<double, InsufficientSamples, InputMismatch> delta_vs_baseline(
    const ScoreMatrix& a, const ScoreMatrix& b, int k,
    PassKEstimator estimator = PassKEstimator::FirstK);

// Delta from curve points: 100 * (a - b) / b.
double delta_percent_from_values(double a, double b);

struct SelectionStats {
  std::optional<double> top10_mean;  // pooled mean of per-input top-10% picks
  std::optional<double> top1_mean;   // mean of per-input best
  long top10_count = 0;
  long top1_count = 0;
};

// include_exact=false drops scores >= 0.99 before selection ("w/o IoU=1").
SelectionStats selection_stats(const ScoreMatrix& m, bool include_exact);

// Standard empirical CDF over all scores: (value, cumulative fraction) at
// each distinct value, final fraction 1.
std::vector<std::pair<double, double>> ecdf(std::span<const double> scores);

struct ComplexityBucket {
  double lo = 0.0;
  double hi = 0.0;
  long inputs = 0;
  std::optional<double> mean_iou;   // mean over inputs of the per-input mean
  std::optional<double> best_iou;   // mean over inputs of the per-input max
  std::optional<double> solved_ratio;  // share of inputs with any score >= 0.9
};

struct MissingProfile {
  std::string message;
};

enum class ComplexityAxis { Tokens, Operations };

std::variant<std::vector<ComplexityBucket>, MissingProfile> complexity_buckets(
    const ScoreMatrix& m, std::span<const dsl::ComplexityProfile> profiles,
    std::span<const double> bucket_edges, ComplexityAxis axis);

inline constexpr double kSolvedThreshold = 0.9;

}  // namespace gf::metrics
