#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "verdict/types.hpp"

namespace verdict {

struct PickProbability {
  double first = 0.0;   // judge prefers the answer shown first
  double second = 0.0;  // judge prefers the answer shown second
  double tie = 0.0;

  double total() const { return first + second + tie; }
};

// The synthetic judge model. Ties occur with probability tie_rate
// regardless of the gap. Conditional on a pick, the higher-Elo side gets
// c = 0.5 + 0.5 * skill * (1 - exp(-|gap| / 400)); position bias then moves
// bias * min(first, second) of pick mass toward the first slot (negative
// bias moves it toward the second), which can never push either side
// negative. `elo_first`/`elo_second` are the ratings of the answers in
// presentation order.
PickProbability judge_pick_probability(const SyntheticJudge& judge,
                                       double elo_first, double elo_second);

// Maps one uniform [0,1) draw to a choice: segments [0, tie),
// [tie, tie + first), [tie + first, 1) in that fixed order.
Choice sample_pick(const PickProbability& p, double u);

// Presentation scheduling for simulated tournaments. Balanced mirrors the
// judging pipeline (seeded AB/BA split per matchup); CanonicalFirst always
// shows the canonical lower-named model first, leaving position bias
// unmitigated — the control arm for bias experiments.
enum class Scheduling { Balanced, CanonicalFirst };

// Samples every (judge, matchup, contest) verdict and returns tallies.
// Each contest draws from a stream derived from (world seed, judge id,
// matchup, contest index), so results are independent of evaluation order
// and identical across reruns and thread layouts.
JudgeMatchupTable simulate_tournament(const SyntheticWorld& world,
                                      Scheduling scheduling);

// Same sampling, materialized as per-contest verdicts for one judge
// (contest ids match make_synthetic_contests).
std::vector<JudgeVerdict> simulate_verdicts(const SyntheticWorld& world,
                                            const SyntheticJudge& judge,
                                            Scheduling scheduling);

// The world's contests as a loadable manifest: ids "c-<pair>-<idx>",
// responses prefixed with [model:<id>] tags (consumed by MockBackend),
// deterministic filler text. Within each matchup the first half is stored
// (lo, hi) and the second half (hi, lo), so both storage orientations
// appear.
std::vector<ContestRecord> make_synthetic_contests(const SyntheticWorld& world);

// Ground-truth judge ratings of the roster as an EloTable.
EloTable judge_true_elos(const SyntheticWorld& world);

// E[p_hat * (1 - p_hat)] for a Binomial(n, p) sample: p(1-p)(n-1)/n — the
// small-n shrinkage that makes per-matchup variance a biased estimator.
double expected_sample_variance(double p, std::size_t n);

// World (de)serialization: JSON with seed, model ratings, matchup plan,
// and judge roster.
SyntheticWorld load_world(const std::filesystem::path& path);
void write_world(const std::filesystem::path& path,
                 const SyntheticWorld& world);

}  // namespace verdict
