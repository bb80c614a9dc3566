#include "verdict/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "verdict/io.hpp"
#include "verdict/judging.hpp"
#include "verdict/rng.hpp"

namespace verdict {

namespace {

void check_judge_params(const SyntheticJudge& judge) {
  if (judge.judge_id.empty())
    throw ValidationError("synthetic judge has an empty id");
  if (judge.skill < 0.0 || judge.skill > 1.0)
    throw ValidationError("judge skill outside [0, 1]: " + judge.judge_id);
  if (judge.tie_rate < 0.0 || judge.tie_rate > 1.0)
    throw ValidationError("judge tie rate outside [0, 1]: " + judge.judge_id);
  if (judge.position_bias < -1.0 || judge.position_bias > 1.0)
    throw ValidationError("judge position bias outside [-1, 1]: " +
                          judge.judge_id);
}

void check_world(const SyntheticWorld& world) {
  if (world.matchups.empty())
    throw ValidationError("world has no matchups");
  if (world.judges.empty())
    throw ValidationError("world has no judges");
  std::set<MatchupKey> keys;
  for (const auto& [key, n] : world.matchups) {
    if (n == 0)
      throw ValidationError("matchup has zero contests: " + key.str());
    if (!keys.insert(key).second)
      throw ValidationError("duplicate matchup in plan: " + key.str());
    world.model_elos.at(key.model_lo);
    world.model_elos.at(key.model_hi);
  }
  std::set<ModelId> judge_ids;
  for (const auto& judge : world.judges) {
    check_judge_params(judge);
    if (!judge_ids.insert(judge.judge_id).second)
      throw ValidationError("duplicate judge id: " + judge.judge_id);
  }
}

// First ceil(n/2) contests of a matchup are stored (lo, hi), the rest
// (hi, lo), so both storage orientations appear in every matchup.
bool stored_lo_first(std::size_t contest_idx, std::size_t n) {
  return contest_idx < (n + 1) / 2;
}

std::string make_contest_id(std::size_t pair_idx, std::size_t contest_idx) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "c-%03zu-%03zu", pair_idx, contest_idx);
  return buf;
}

double contest_draw(const SyntheticWorld& world, std::uint64_t judge_hash,
                    std::uint64_t key_hash, std::size_t contest_idx) {
  return rng::unit_at(
      rng::derive({world.seed, judge_hash, key_hash, contest_idx}));
}

// Presentation order per contest index, relative to canonical (lo, hi):
// true = lo shown first.
std::vector<bool> lo_first_plan(const MatchupKey& key, std::size_t pair_idx,
                                std::size_t n, std::uint64_t seed,
                                Scheduling scheduling) {
  std::vector<bool> lo_first(n, true);
  if (scheduling == Scheduling::CanonicalFirst) return lo_first;

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = make_contest_id(pair_idx, i);
  OrderPlan plan = schedule_order_ids(key, ids, seed);
  for (std::size_t i = 0; i < n; ++i) {
    // Order AB on a (hi, lo)-stored contest shows hi first.
    bool ab = plan[i].second == PresentationOrder::AB;
    lo_first[i] = ab == stored_lo_first(i, n);
  }
  return lo_first;
}

}  // namespace

Choice sample_pick(const PickProbability& p, double u) {
  if (u < p.tie) return Choice::Tie;
  if (u < p.tie + p.first) return Choice::First;
  return Choice::Second;
}

PickProbability judge_pick_probability(const SyntheticJudge& judge,
                                       double elo_first, double elo_second) {
  check_judge_params(judge);
  double gap = std::abs(elo_first - elo_second);
  double c = 0.5 + 0.5 * judge.skill * (1.0 - std::exp(-gap / 400.0));
  double pick = 1.0 - judge.tie_rate;

  PickProbability p;
  p.tie = judge.tie_rate;
  if (elo_first >= elo_second) {
    p.first = c * pick;
    p.second = (1.0 - c) * pick;
  } else {
    p.first = (1.0 - c) * pick;
    p.second = c * pick;
  }
  double delta = judge.position_bias * std::min(p.first, p.second);
  p.first += delta;
  p.second -= delta;
  return p;
}

JudgeMatchupTable simulate_tournament(const SyntheticWorld& world,
                                      Scheduling scheduling) {
  check_world(world);
  JudgeMatchupTable table;
  for (const auto& judge : world.judges) {
    std::uint64_t judge_hash = rng::hash_str(judge.judge_id);
    auto& row = table[judge.judge_id];
    for (std::size_t m = 0; m < world.matchups.size(); ++m) {
      const auto& [key, n] = world.matchups[m];
      double elo_lo = world.model_elos.at(key.model_lo);
      double elo_hi = world.model_elos.at(key.model_hi);
      PickProbability p_lo_first = judge_pick_probability(judge, elo_lo, elo_hi);
      PickProbability p_hi_first = judge_pick_probability(judge, elo_hi, elo_lo);
      std::vector<bool> lo_first =
          lo_first_plan(key, m, n, world.seed, scheduling);
      std::uint64_t key_hash = rng::hash_str(key.str());

      MatchupStats stats;
      stats.key = key;
      stats.judge_id = judge.judge_id;
      stats.n = n;
      for (std::size_t i = 0; i < n; ++i) {
        double u = contest_draw(world, judge_hash, key_hash, i);
        const PickProbability& p = lo_first[i] ? p_lo_first : p_hi_first;
        Choice choice = sample_pick(p, u);
        if (choice == Choice::Tie)
          ++stats.ties;
        else if ((choice == Choice::First) == lo_first[i])
          ++stats.wins_lo;
      }
      stats.p = (static_cast<double>(stats.wins_lo) + 0.5 * stats.ties) /
                static_cast<double>(stats.n);
      stats.variance = stats.p * (1.0 - stats.p);
      row.emplace(key, stats);
    }
  }
  return table;
}

std::vector<JudgeVerdict> simulate_verdicts(const SyntheticWorld& world,
                                            const SyntheticJudge& judge,
                                            Scheduling scheduling) {
  check_world(world);
  std::uint64_t judge_hash = rng::hash_str(judge.judge_id);
  std::vector<JudgeVerdict> verdicts;
  for (std::size_t m = 0; m < world.matchups.size(); ++m) {
    const auto& [key, n] = world.matchups[m];
    double elo_lo = world.model_elos.at(key.model_lo);
    double elo_hi = world.model_elos.at(key.model_hi);
    PickProbability p_lo_first = judge_pick_probability(judge, elo_lo, elo_hi);
    PickProbability p_hi_first = judge_pick_probability(judge, elo_hi, elo_lo);
    std::vector<bool> lo_first =
        lo_first_plan(key, m, n, world.seed, scheduling);
    std::uint64_t key_hash = rng::hash_str(key.str());

    for (std::size_t i = 0; i < n; ++i) {
      double u = contest_draw(world, judge_hash, key_hash, i);
      const PickProbability& p = lo_first[i] ? p_lo_first : p_hi_first;
      Choice choice = sample_pick(p, u);

      JudgeVerdict v;
      v.contest_id = make_contest_id(m, i);
      v.judge_id = judge.judge_id;
      v.order = (lo_first[i] == stored_lo_first(i, n))
                    ? PresentationOrder::AB
                    : PresentationOrder::BA;
      v.choice = choice;
      if (choice == Choice::Tie) {
        v.winner = std::nullopt;
      } else {
        bool first_won = choice == Choice::First;
        bool lo_won = first_won == lo_first[i];
        v.winner = lo_won ? key.model_lo : key.model_hi;
      }
      verdicts.push_back(std::move(v));
    }
  }
  return verdicts;
}

std::vector<ContestRecord> make_synthetic_contests(
    const SyntheticWorld& world) {
  check_world(world);
  std::vector<ContestRecord> records;
  for (std::size_t m = 0; m < world.matchups.size(); ++m) {
    const auto& [key, n] = world.matchups[m];
    for (std::size_t i = 0; i < n; ++i) {
      bool lo_first = stored_lo_first(i, n);
      const ModelId& first = lo_first ? key.model_lo : key.model_hi;
      const ModelId& second = lo_first ? key.model_hi : key.model_lo;

      ContestRecord r;
      r.contest_id = make_contest_id(m, i);
      char prompt[96];
      std::snprintf(prompt, sizeof prompt,
                    "Synthetic task %03zu-%03zu: summarize the trade-offs and "
                    "recommend an option.",
                    m, i);
      r.prompt = prompt;
      r.model_a = first;
      r.model_b = second;
      r.response_a = "[model:" + first + "] Canned answer from " + first +
                     " for contest " + r.contest_id + ".";
      r.response_b = "[model:" + second + "] Canned answer from " + second +
                     " for contest " + r.contest_id + ".";
      records.push_back(std::move(r));
    }
  }
  return records;
}

EloTable judge_true_elos(const SyntheticWorld& world) {
  EloTable table;
  for (const auto& judge : world.judges)
    if (!table.entries.emplace(judge.judge_id, judge.true_elo).second)
      throw ValidationError("duplicate judge id: " + judge.judge_id);
  return table;
}

double expected_sample_variance(double p, std::size_t n) {
  if (p < 0.0 || p > 1.0)
    throw ValidationError("probability outside [0, 1]");
  if (n == 0) throw ValidationError("sample size must be positive");
  return p * (1.0 - p) * static_cast<double>(n - 1) / static_cast<double>(n);
}

SyntheticWorld load_world(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("world file is not valid JSON: " + path.string());
  }

  static const std::set<std::string> known{"seed", "models", "matchups",
                                           "judges"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k))
      throw ParseError("unknown world key: " + k);

  SyntheticWorld world;
  if (!j.contains("seed") || !j["seed"].is_number_unsigned())
    throw ParseError("world needs an unsigned \"seed\"");
  world.seed = j["seed"].get<std::uint64_t>();

  if (!j.contains("models") || !j["models"].is_object())
    throw ParseError("world needs a \"models\" object");
  for (const auto& [model, elo] : j["models"].items()) {
    if (!elo.is_number())
      throw ParseError("model rating is not a number: " + model);
    world.model_elos.entries.emplace(model, elo.get<double>());
  }

  if (!j.contains("matchups") || !j["matchups"].is_array())
    throw ParseError("world needs a \"matchups\" array");
  for (const auto& row : j["matchups"]) {
    if (!row.is_object() || !row.contains("model_a") ||
        !row.contains("model_b") || !row.contains("contests"))
      throw ParseError("matchup rows need model_a, model_b, contests");
    MatchupKey key(row["model_a"].get<std::string>(),
                   row["model_b"].get<std::string>());
    world.matchups.emplace_back(key, row["contests"].get<std::size_t>());
  }

  if (!j.contains("judges") || !j["judges"].is_array())
    throw ParseError("world needs a \"judges\" array");
  for (const auto& row : j["judges"]) {
    SyntheticJudge judge;
    judge.judge_id = row.value("judge_id", std::string());
    judge.skill = row.value("skill", 0.0);
    judge.tie_rate = row.value("tie_rate", 0.0);
    judge.position_bias = row.value("position_bias", 0.0);
    judge.true_elo = row.value("true_elo", 0.0);
    world.judges.push_back(std::move(judge));
  }

  check_world(world);
  return world;
}

void write_world(const std::filesystem::path& path,
                 const SyntheticWorld& world) {
  check_world(world);
  nlohmann::ordered_json j;
  j["seed"] = world.seed;
  nlohmann::ordered_json models = nlohmann::ordered_json::object();
  for (const auto& [model, elo] : world.model_elos.entries)
    models[model] = elo;
  j["models"] = models;
  nlohmann::ordered_json matchups = nlohmann::ordered_json::array();
  for (const auto& [key, n] : world.matchups) {
    nlohmann::ordered_json row;
    row["model_a"] = key.model_lo;
    row["model_b"] = key.model_hi;
    row["contests"] = n;
    matchups.push_back(row);
  }
  j["matchups"] = matchups;
  nlohmann::ordered_json judges = nlohmann::ordered_json::array();
  for (const auto& judge : world.judges) {
    nlohmann::ordered_json row;
    row["judge_id"] = judge.judge_id;
    row["skill"] = judge.skill;
    row["tie_rate"] = judge.tie_rate;
    row["position_bias"] = judge.position_bias;
    row["true_elo"] = judge.true_elo;
    judges.push_back(row);
  }
  j["judges"] = judges;
  io::atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace verdict
