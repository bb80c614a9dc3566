#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "verdict/types.hpp"

namespace verdict {

// Sums `values` by recursive halving (pairwise summation). Used wherever a
// sum's value must not depend on element order beyond the array layout,
// so re-derived reports stay bit-stable.
double pairwise_sum(std::span<const double> values);

// Contest-weighted mean Bernoulli variance over one judge's matchups:
// sum(n_ij * var_ij) / sum(n_ij), both sums pairwise. All stats must carry
// the same judge id and at least one contest.
double mean_variance(const std::vector<MatchupStats>& stats);

// Consistency = 1 - 4 * mean variance, mapping [0, 0.25] onto [1, 0].
// Inputs outside that range (beyond a 1e-12 guard) are invalid.
double consistency_score(double mean_var);

ConsistencyReport make_consistency_report(
    const ModelId& judge_id, const std::vector<MatchupStats>& stats);

// Pearson correlation; throws NumericError when either side has zero
// variance (undefined correlation) and ValidationError on size mismatch or
// fewer than two points.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Descending competition ranks with ties averaged: the largest value gets
// rank 1; equal values share the mean of the ranks they span.
std::vector<double> average_ranks_desc(std::span<const double> values);

// Mean |rank(x_i) - rank(y_i)| under descending average ranks.
double rank_displacement(std::span<const double> xs,
                         std::span<const double> ys);

struct RegressionFit {
  double slope = 0.0;      // Elo per unit consistency
  double intercept = 0.0;  // Elo at consistency 0
  double mae = 0.0;        // mean |predicted - actual| Elo, in-sample
};

// Calibration line for predicting Elo from consistency: the least-squares
// trend is fit on (elo, consistency) axes and inverted, which is also how
// the reference results were produced; predictions and MAE are in-sample.
// Throws ValidationError below 3 points and NumericError on a singular fit
// (zero variance on either axis).
RegressionFit fit_elo_regression(std::span<const double> consistencies,
                                 std::span<const double> elos);

CorrelationSummary summarize_correlation(std::span<const double> consistencies,
                                         std::span<const double> elos);

// Population variance of per-judge values (e.g. per-matchup verdict
// variances across judges); needs at least two entries.
double variance_of_variance(const std::map<ModelId, double>& per_judge);

enum class ConvergenceStrategy { Random, SortedByGap };

std::string to_string(ConvergenceStrategy strategy);
ConvergenceStrategy strategy_from_string(const std::string& s);

struct ConvergencePoint {
  std::size_t matchup_count = 0;
  double r = 0.0;
};

// Correlation between judge Elo and consistency computed over growing
// matchup prefixes k = 1..K. Random: the mean curve over `permutations`
// seeded shuffles of the matchup set. SortedByGap: one pass over matchups
// ordered by descending matchee Elo gap. Every judge must cover the same
// matchup set (missing cells are named); both strategies end at the same
// full-set correlation.
std::vector<ConvergencePoint> convergence_curve(
    const JudgeMatchupTable& table, const EloTable& judge_elos,
    const EloTable& matchee_elos, ConvergenceStrategy strategy,
    std::size_t permutations, std::uint64_t seed);

struct ClusterResult {
  std::vector<std::size_t> members;  // indices into the input arrays
  double centroid = 0.0;
  std::optional<double> r;  // within-cluster Pearson; nullopt below 2 points
};

// 1-D k-means on the consistency axis (seeded, `restarts` random inits,
// best SSE kept), then per-cluster consistency/Elo correlation. Clusters
// are returned sorted by centroid ascending. Needs more than k points.
std::vector<ClusterResult> cluster_correlations(
    std::span<const double> consistencies, std::span<const double> elos,
    std::size_t k, std::size_t restarts, std::uint64_t seed);

}  // namespace verdict
