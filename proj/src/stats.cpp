#include "verdict/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "verdict/contest_data.hpp"
#include "verdict/rng.hpp"

namespace verdict {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_stats_invariants(const MatchupStats& s) {
  if (s.n == 0)
    throw ValidationError("matchup has zero contests: " + s.key.str());
  if (s.wins_lo + s.ties > s.n)
    throw ValidationError("matchup tally exceeds contest count: " +
                          s.key.str());
  double p = (static_cast<double>(s.wins_lo) + 0.5 * s.ties) /
             static_cast<double>(s.n);
  if (std::abs(p - s.p) > 1e-9 ||
      std::abs(s.p * (1.0 - s.p) - s.variance) > 1e-9)
    throw ValidationError("matchup stats are internally inconsistent: " +
                          s.key.str());
}

}  // namespace

double mean_variance(const std::vector<MatchupStats>& stats) {
  if (stats.empty())
    throw ValidationError("mean variance needs at least one matchup");
  const ModelId& judge = stats.front().judge_id;
  std::vector<double> weighted(stats.size());
  std::vector<double> weights(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const MatchupStats& s = stats[i];
    if (s.judge_id != judge)
      throw ValidationError("mean variance mixes judges: " + judge + " and " +
                            s.judge_id);
    check_stats_invariants(s);
    weighted[i] = static_cast<double>(s.n) * s.variance;
    weights[i] = static_cast<double>(s.n);
  }
  return pairwise_sum(weighted) / pairwise_sum(weights);
}

double consistency_score(double mean_var) {
  constexpr double kGuard = 1e-12;
  if (mean_var < -kGuard || mean_var > 0.25 + kGuard)
    throw ValidationError("mean variance outside [0, 0.25]: " +
                          std::to_string(mean_var));
  double clamped = std::min(0.25, std::max(0.0, mean_var));
  return 1.0 - 4.0 * clamped;
}

ConsistencyReport make_consistency_report(
    const ModelId& judge_id, const std::vector<MatchupStats>& stats) {
  ConsistencyReport report;
  report.judge_id = judge_id;
  for (const auto& s : stats) {
    if (s.judge_id != judge_id)
      throw ValidationError("report mixes judges: " + judge_id + " and " +
                            s.judge_id);
    report.matchups.push_back(s.key);
    report.total_contests += s.n;
  }
  report.mean_variance = mean_variance(stats);
  report.consistency = consistency_score(report.mean_variance);
  return report;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw ValidationError("correlation inputs differ in length");
  std::size_t n = xs.size();
  if (n < 2) throw ValidationError("correlation needs at least two points");

  std::vector<double> buf(n);
  auto mean_of = [&](std::span<const double> v) {
    std::copy(v.begin(), v.end(), buf.begin());
    return pairwise_sum(buf) / static_cast<double>(n);
  };
  double mx = mean_of(xs);
  double my = mean_of(ys);

  std::vector<double> dxy(n), dxx(n), dyy(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    dxy[i] = dx * dy;
    dxx[i] = dx * dx;
    dyy[i] = dy * dy;
  }
  double sxx = pairwise_sum(dxx);
  double syy = pairwise_sum(dyy);
  if (sxx == 0.0 || syy == 0.0)
    throw NumericError("correlation undefined: zero variance input");
  return pairwise_sum(dxy) / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks_desc(std::span<const double> values) {
  std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double rank_displacement(std::span<const double> xs,
                         std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw ValidationError("rank displacement inputs differ in length");
  if (xs.size() < 2)
    throw ValidationError("rank displacement needs at least two points");
  std::vector<double> rx = average_ranks_desc(xs);
  std::vector<double> ry = average_ranks_desc(ys);
  std::vector<double> diffs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    diffs[i] = std::abs(rx[i] - ry[i]);
  return pairwise_sum(diffs) / static_cast<double>(xs.size());
}

RegressionFit fit_elo_regression(std::span<const double> consistencies,
                                 std::span<const double> elos) {
  if (consistencies.size() != elos.size())
    throw ValidationError("regression inputs differ in length");
  std::size_t n = consistencies.size();
  if (n < 3) throw ValidationError("regression needs at least three points");

  std::vector<double> buf(n);
  auto mean_of = [&](std::span<const double> v) {
    std::copy(v.begin(), v.end(), buf.begin());
    return pairwise_sum(buf) / static_cast<double>(n);
  };
  double me = mean_of(elos);
  double mc = mean_of(consistencies);

  std::vector<double> see(n), sec(n);
  for (std::size_t i = 0; i < n; ++i) {
    double de = elos[i] - me;
    see[i] = de * de;
    sec[i] = de * (consistencies[i] - mc);
  }
  double var_e = pairwise_sum(see);
  if (var_e == 0.0)
    throw NumericError("singular fit: zero variance in elo ratings");
  double a = pairwise_sum(sec) / var_e;  // consistency per Elo point
  if (a == 0.0)
    throw NumericError("singular fit: consistency does not vary with elo");
  double b = mc - a * me;

  RegressionFit fit;
  fit.slope = 1.0 / a;
  fit.intercept = -b / a;
  std::vector<double> errs(n);
  for (std::size_t i = 0; i < n; ++i) {
    double predicted = (consistencies[i] - b) / a;
    errs[i] = std::abs(predicted - elos[i]);
  }
  fit.mae = pairwise_sum(errs) / static_cast<double>(n);
  return fit;
}

CorrelationSummary summarize_correlation(std::span<const double> consistencies,
                                         std::span<const double> elos) {
  CorrelationSummary summary;
  summary.n_judges = consistencies.size();
  summary.pearson_r = pearson(consistencies, elos);
  summary.mean_rank_displacement = rank_displacement(elos, consistencies);
  RegressionFit fit = fit_elo_regression(consistencies, elos);
  summary.regression_slope = fit.slope;
  summary.regression_intercept = fit.intercept;
  summary.regression_mae = fit.mae;
  return summary;
}

double variance_of_variance(const std::map<ModelId, double>& per_judge) {
  if (per_judge.size() < 2)
    throw ValidationError("variance of variance needs at least two judges");
  std::vector<double> values;
  values.reserve(per_judge.size());
  for (const auto& [judge, v] : per_judge) values.push_back(v);
  double mean = pairwise_sum(values) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double d = values[i] - mean;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(values.size());
}

std::string to_string(ConvergenceStrategy strategy) {
  return strategy == ConvergenceStrategy::Random ? "random" : "sorted";
}

ConvergenceStrategy strategy_from_string(const std::string& s) {
  if (s == "random") return ConvergenceStrategy::Random;
  if (s == "sorted") return ConvergenceStrategy::SortedByGap;
  throw ConfigError("unknown convergence strategy: " + s +
                    " (expected random|sorted)");
}

namespace {

// Correlation between judge elo and consistency over the first k matchups
// of `ordering`, for every k. Judges iterate in id order.
std::vector<double> prefix_correlations(
    const JudgeMatchupTable& table, const EloTable& judge_elos,
    const std::vector<MatchupKey>& ordering) {
  std::size_t n_judges = table.size();
  std::size_t n_matchups = ordering.size();

  std::vector<double> elos;
  elos.reserve(n_judges);
  // Per judge, weights and weighted variances laid out in ordering order.
  std::vector<std::vector<double>> weighted(n_judges), weights(n_judges);
  std::size_t ji = 0;
  for (const auto& [judge_id, cells] : table) {
    elos.push_back(judge_elos.at(judge_id));
    weighted[ji].resize(n_matchups);
    weights[ji].resize(n_matchups);
    for (std::size_t m = 0; m < n_matchups; ++m) {
      auto it = cells.find(ordering[m]);
      if (it == cells.end())
        throw ValidationError("missing matchup cell: judge " + judge_id +
                              ", matchup " + ordering[m].str());
      weighted[ji][m] =
          static_cast<double>(it->second.n) * it->second.variance;
      weights[ji][m] = static_cast<double>(it->second.n);
    }
    ++ji;
  }

  std::vector<double> rs(n_matchups);
  std::vector<double> consistencies(n_judges);
  for (std::size_t k = 1; k <= n_matchups; ++k) {
    for (std::size_t j = 0; j < n_judges; ++j) {
      double mv = pairwise_sum(std::span(weighted[j]).first(k)) /
                  pairwise_sum(std::span(weights[j]).first(k));
      consistencies[j] = consistency_score(mv);
    }
    rs[k - 1] = pearson(consistencies, elos);
  }
  return rs;
}

}  // namespace

std::vector<ConvergencePoint> convergence_curve(
    const JudgeMatchupTable& table, const EloTable& judge_elos,
    const EloTable& matchee_elos, ConvergenceStrategy strategy,
    std::size_t permutations, std::uint64_t seed) {
  if (table.empty())
    throw ValidationError("convergence curve needs at least one judge");

  // The matchup universe is the union across judges; every judge must
  // cover all of it (prefix_correlations names any hole).
  std::set<MatchupKey> universe;
  for (const auto& [judge_id, cells] : table)
    for (const auto& [key, s] : cells) universe.insert(key);
  std::vector<MatchupKey> keys(universe.begin(), universe.end());

  std::vector<ConvergencePoint> curve(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k)
    curve[k].matchup_count = k + 1;

  if (strategy == ConvergenceStrategy::SortedByGap) {
    std::vector<MatchupKey> ordering =
        sort_keys_by_elo_gap(keys, matchee_elos);
    std::vector<double> rs = prefix_correlations(table, judge_elos, ordering);
    for (std::size_t k = 0; k < rs.size(); ++k) curve[k].r = rs[k];
    return curve;
  }

  if (permutations == 0)
    throw ValidationError("random convergence needs at least one permutation");
  std::vector<double> acc(keys.size(), 0.0);
  for (std::size_t p = 0; p < permutations; ++p) {
    std::vector<MatchupKey> ordering = keys;
    rng::Stream stream(rng::derive({seed, 0x636f6e76ULL, p}));
    stream.shuffle(ordering);
    std::vector<double> rs = prefix_correlations(table, judge_elos, ordering);
    for (std::size_t k = 0; k < rs.size(); ++k) acc[k] += rs[k];
  }
  for (std::size_t k = 0; k < acc.size(); ++k)
    curve[k].r = acc[k] / static_cast<double>(permutations);
  return curve;
}

std::vector<ClusterResult> cluster_correlations(
    std::span<const double> consistencies, std::span<const double> elos,
    std::size_t k, std::size_t restarts, std::uint64_t seed) {
  if (consistencies.size() != elos.size())
    throw ValidationError("cluster inputs differ in length");
  std::size_t n = consistencies.size();
  if (k == 0) throw ValidationError("cluster count must be positive");
  if (n <= k)
    throw ValidationError("clustering needs more points than clusters");
  if (restarts == 0)
    throw ValidationError("clustering needs at least one restart");

  std::vector<std::size_t> best_assign(n, 0);
  double best_sse = std::numeric_limits<double>::infinity();

  rng::Stream stream(rng::derive({seed, 0x6b6d65616e73ULL}));
  std::vector<double> centroids(k);
  std::vector<std::size_t> assign(n, 0);
  for (std::size_t r = 0; r < restarts; ++r) {
    // Init: k distinct point indices.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    stream.shuffle(idx);
    for (std::size_t c = 0; c < k; ++c) centroids[c] = consistencies[idx[c]];

    for (int iter = 0; iter < 100; ++iter) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best_c = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          double d = std::abs(consistencies[i] - centroids[c]);
          if (d < best_d) {
            best_d = d;
            best_c = c;
          }
        }
        if (assign[i] != best_c) {
          assign[i] = best_c;
          moved = true;
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (assign[i] == c) {
            sum += consistencies[i];
            ++count;
          }
        if (count > 0) centroids[c] = sum / static_cast<double>(count);
        // An emptied cluster keeps its centroid; a later restart can do
        // better, and with 1-D data and distinct inits this is rare.
      }
      if (!moved && iter > 0) break;
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = consistencies[i] - centroids[assign[i]];
      sse += d * d;
    }
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best_assign = assign;
    }
  }

  // Order clusters by centroid ascending.
  std::vector<double> final_centroid(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    final_centroid[best_assign[i]] += consistencies[i];
    ++count[best_assign[i]];
  }
  std::vector<std::size_t> cluster_order;
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] > 0) {
      final_centroid[c] /= static_cast<double>(count[c]);
      cluster_order.push_back(c);
    }
  std::sort(cluster_order.begin(), cluster_order.end(),
            [&](std::size_t a, std::size_t b) {
              return final_centroid[a] < final_centroid[b];
            });

  std::vector<ClusterResult> results;
  for (std::size_t c : cluster_order) {
    ClusterResult res;
    res.centroid = final_centroid[c];
    std::vector<double> cx, cy;
    for (std::size_t i = 0; i < n; ++i)
      if (best_assign[i] == c) {
        res.members.push_back(i);
        cx.push_back(consistencies[i]);
        cy.push_back(elos[i]);
      }
    if (cx.size() >= 2) {
      try {
        res.r = pearson(cx, cy);
      } catch (const NumericError&) {
        res.r = std::nullopt;  // zero spread within the cluster
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace verdict
