#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verdict/errors.hpp"

namespace verdict {

using ModelId = std::string;

// One pairwise contest as stored on disk: a prompt plus two model answers.
// The storage orientation (which model sits in slot a) is arbitrary; the
// presentation order shown to a judge is decided separately by scheduling.
struct ContestRecord {
  std::string contest_id;
  std::string prompt;
  ModelId model_a;
  ModelId model_b;
  std::string response_a;
  std::string response_b;
};

// Canonical unordered model pair: model_lo < model_hi lexicographically.
struct MatchupKey {
  ModelId model_lo;
  ModelId model_hi;

  MatchupKey() = default;
  MatchupKey(ModelId first, ModelId second) {
    if (first == second)
      throw ValidationError("matchup pairs a model with itself: " + first);
    if (second < first) std::swap(first, second);
    model_lo = std::move(first);
    model_hi = std::move(second);
  }

  auto operator<=>(const MatchupKey&) const = default;

  std::string str() const { return model_lo + " vs " + model_hi; }
};

// Elo ratings keyed by model (or judge) id.
struct EloTable {
  std::map<ModelId, double> entries;

  bool contains(const ModelId& id) const { return entries.count(id) != 0; }

  double at(const ModelId& id) const {
    auto it = entries.find(id);
    if (it == entries.end())
      throw LookupError("no elo rating for model: " + id);
    return it->second;
  }

  double gap(const MatchupKey& key) const {
    double lo = at(key.model_lo);
    double hi = at(key.model_hi);
    return lo >= hi ? lo - hi : hi - lo;
  }
};

// Which stored answer was shown as "Answer #1".
enum class PresentationOrder { AB, BA };

// The judge's raw pick in presentation space.
enum class Choice { First, Second, Tie };

std::string to_string(PresentationOrder order);
std::string to_string(Choice choice);
PresentationOrder order_from_string(const std::string& s);
Choice choice_from_string(const std::string& s);

// One elicitation outcome, successful or failed. On success `choice` is set
// and `winner` holds the preferred model id (nullopt = tie). On failure
// `failed` is true, `failure_reason` says why, and choice/winner are empty.
struct JudgeVerdict {
  std::string contest_id;
  ModelId judge_id;
  PresentationOrder order = PresentationOrder::AB;
  std::string reasoning;
  std::optional<Choice> choice;
  std::optional<ModelId> winner;
  bool failed = false;
  std::string failure_reason;
};

// Per-(judge, matchup) verdict tally. p is the share for model_lo with ties
// at half weight; variance is the Bernoulli variance p * (1 - p).
struct MatchupStats {
  MatchupKey key;
  ModelId judge_id;
  std::size_t n = 0;
  std::size_t wins_lo = 0;
  std::size_t ties = 0;
  double p = 0.0;
  double variance = 0.0;
};

// Per-judge consistency summary.
struct ConsistencyReport {
  ModelId judge_id;
  std::vector<MatchupKey> matchups;
  std::size_t total_contests = 0;
  double mean_variance = 0.0;
  double consistency = 0.0;
};

// Cross-judge agreement between consistency scores and Elo ratings.
struct CorrelationSummary {
  double pearson_r = 0.0;
  double mean_rank_displacement = 0.0;
  double regression_slope = 0.0;      // Elo per unit consistency
  double regression_intercept = 0.0;  // Elo at consistency 0
  double regression_mae = 0.0;        // Elo points
  std::size_t n_judges = 0;
};

// Parameters of one synthetic judge.
struct SyntheticJudge {
  ModelId judge_id;
  double skill = 0.0;          // 0 = coin flip, 1 = max discrimination
  double tie_rate = 0.0;       // unconditional tie probability
  double position_bias = 0.0;  // >0 favors the first-shown answer
  double true_elo = 0.0;       // ground-truth judging strength
};

// A self-contained synthetic tournament: matchee ratings, the matchup plan,
// and a judge roster. `contests_per_matchup` applies where a plan row does
// not override it.
struct SyntheticWorld {
  std::uint64_t seed = 0;
  EloTable model_elos;
  std::vector<std::pair<MatchupKey, std::size_t>> matchups;
  std::vector<SyntheticJudge> judges;
};

// judge -> matchup -> tally; the interchange shape between scoring,
// convergence analysis, and simulation.
using JudgeMatchupTable = std::map<ModelId, std::map<MatchupKey, MatchupStats>>;

}  // namespace verdict
