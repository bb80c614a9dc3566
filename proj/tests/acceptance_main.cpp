// End-to-end acceptance gates over the packaged fixtures and the synthetic
// pipeline. Each gate prints one [PASS]/[FAIL] line with the measured
// values; the process exits nonzero if any gate fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verdict/cli.hpp"
#include "verdict/contest_data.hpp"
#include "verdict/errors.hpp"
#include "verdict/io.hpp"
#include "verdict/rng.hpp"
#include "verdict/simulation.hpp"
#include "verdict/stats.hpp"
#include "verdict/types.hpp"

using namespace verdict;
namespace fs = std::filesystem;

namespace {

const fs::path kData = VERDICT_DATA_DIR;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string num(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

int run_or_die(const std::vector<std::string>& args) {
  std::ostringstream log, err;
  int code = run_cli(args, log, err);
  if (code != 0)
    throw Error("command failed (" + std::to_string(code) + "): " +
                err.str());
  return code;
}

// --- shared fixture computations ---------------------------------------

nlohmann::json correlate_packaged_table(const fs::path& out) {
  run_or_die({"correlate", "--consistency",
              (kData / "table1_consistency.csv").string(), "--seed", "1",
              "--out", out.string()});
  return nlohmann::json::parse(io::read_file(out / "summary.json"));
}

std::vector<double> judge_consistencies(const JudgeMatchupTable& table,
                                        const EloTable& elos,
                                        std::vector<double>& elo_out) {
  std::vector<double> consistencies;
  for (const auto& [judge, cells] : table) {
    std::vector<MatchupStats> stats;
    for (const auto& [key, s] : cells) stats.push_back(s);
    consistencies.push_back(consistency_score(mean_variance(stats)));
    elo_out.push_back(elos.at(judge));
  }
  return consistencies;
}

// --- gates ---------------------------------------------------------------

Outcome gate_correlation(const nlohmann::json& summary) {
  double r = std::stod(summary.at("r").get<std::string>());
  return {std::fabs(r - 0.91) <= 0.02,
          "r = " + num(r) + " (target 0.91 +/- 0.02)"};
}

Outcome gate_mae(const nlohmann::json& summary) {
  double mae = std::stod(summary.at("mae").get<std::string>());
  return {std::fabs(mae - 35.2) <= 2.0,
          "mae = " + num(mae, 2) + " (target 35.2 +/- 2.0)"};
}

Outcome gate_displacement(const nlohmann::json& summary) {
  double d = std::stod(summary.at("rank_displacement").get<std::string>());
  return {std::fabs(d - 2.8) <= 0.3,
          "displacement = " + num(d, 3) + " (target 2.8 +/- 0.3)"};
}

Outcome gate_gap_order() {
  EloTable elos = load_elo_table(kData / "table2_elo.csv");
  std::vector<MatchupGapRow> plan =
      load_matchup_gaps(kData / "table3_matchups.csv");
  MatchupMap groups =
      group_matchups(load_contests(kData / "contests_2800.jsonl"));
  std::vector<MatchupKey> selected =
      select_matchups_by_elo_gap(groups, elos, plan.size());

  if (selected.size() != plan.size())
    return {false, "selected " + std::to_string(selected.size()) + " of " +
                       std::to_string(plan.size()) + " matchups"};

  double top_gap = elos.gap(selected[0]);
  bool top_ok =
      selected[0] == MatchupKey(plan[0].model_a, plan[0].model_b) &&
      top_gap == 307.0;

  std::size_t head_exact = 0;
  while (head_exact < selected.size() &&
         selected[head_exact] == MatchupKey(plan[head_exact].model_a,
                                            plan[head_exact].model_b))
    ++head_exact;

  bool non_increasing = true;
  for (std::size_t i = 1; i < selected.size(); ++i)
    if (elos.gap(selected[i]) > elos.gap(selected[i - 1]))
      non_increasing = false;

  std::map<MatchupKey, double> stated;
  for (const auto& row : plan)
    stated.emplace(MatchupKey(row.model_a, row.model_b), row.gap);
  double max_dev = 0.0;
  for (const auto& key : selected)
    max_dev = std::max(max_dev, std::fabs(elos.gap(key) - stated.at(key)));

  bool ok = top_ok && head_exact >= 10 && non_increasing && max_dev <= 1.0;
  return {ok, "top gap " + num(top_gap, 0) + ", first " +
                  std::to_string(head_exact) +
                  " rows exact, order non-increasing, stated gaps within +/-" +
                  num(max_dev, 0) + " (table rounds to integers)"};
}

Outcome gate_exact_scores() {
  // Every tally over up to three matchups with up to six contests each,
  // checked against integer arithmetic: with p = (2w + t) / (2n), the
  // weighted term n * p(1-p) equals (2w+t)(2n-2w-t) / (4n) exactly.
  const std::vector<MatchupKey> keys = {MatchupKey("a", "b"),
                                        MatchupKey("a", "c"),
                                        MatchupKey("b", "c")};
  struct Cell {
    std::size_t n, w, t;
  };
  std::vector<Cell> cells;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t w = 0; w <= n; ++w)
      for (std::size_t t = 0; w + t <= n; ++t) cells.push_back({n, w, t});

  std::size_t combos = 0;
  double worst = 0.0;
  std::vector<std::size_t> pick(3);
  for (std::size_t m = 1; m <= 3; ++m) {
    std::vector<std::size_t> idx(m, 0);
    for (;;) {
      std::vector<MatchupStats> stats;
      std::int64_t total_n = 0, lcm_n = 1;
      for (std::size_t j = 0; j < m; ++j) {
        const Cell& c = cells[idx[j]];
        MatchupStats s;
        s.key = keys[j];
        s.judge_id = "j";
        s.n = c.n;
        s.wins_lo = c.w;
        s.ties = c.t;
        s.p = (c.w + 0.5 * c.t) / c.n;
        s.variance = s.p * (1.0 - s.p);
        stats.push_back(s);
        total_n += static_cast<std::int64_t>(c.n);
        lcm_n = std::lcm(lcm_n, static_cast<std::int64_t>(c.n));
      }
      std::int64_t scale = 4 * lcm_n;
      std::int64_t numer = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const Cell& c = cells[idx[j]];
        std::int64_t a = static_cast<std::int64_t>(2 * c.w + c.t);
        std::int64_t b = static_cast<std::int64_t>(2 * c.n) - a;
        numer += a * b * (scale / static_cast<std::int64_t>(4 * c.n));
      }
      double exact_mean_var = static_cast<double>(numer) /
                              (static_cast<double>(scale) *
                               static_cast<double>(total_n));
      double got_mv = mean_variance(stats);
      double got_c = consistency_score(got_mv);
      worst = std::max(worst, std::fabs(got_mv - exact_mean_var));
      worst = std::max(worst,
                       std::fabs(got_c - (1.0 - 4.0 * exact_mean_var)));
      ++combos;

      std::size_t j = 0;
      while (j < m && ++idx[j] == cells.size()) idx[j++] = 0;
      if (j == m) break;
    }
  }
  return {worst <= 1e-12, std::to_string(combos) +
                              " tallies, max deviation " + num(worst * 1e13, 2) +
                              "e-13 (bound 1e-12)"};
}

Outcome gate_estimator_bias() {
  rng::Stream stream(6021947);
  const std::size_t reps = 100000;
  double sum = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    int wins = 0;
    for (int d = 0; d < 20; ++d)
      if (stream.next_unit() < 0.7) ++wins;
    double p = wins / 20.0;
    sum += p * (1.0 - p);
  }
  double mean = sum / reps;
  double expected = expected_sample_variance(0.7, 20);
  return {std::fabs(mean - expected) <= 0.001,
          "mean " + num(mean) + " vs expected " + num(expected) +
              " (tolerance 0.001)"};
}

Outcome gate_skill_recovery(const JudgeMatchupTable& table,
                            const SyntheticWorld& world) {
  std::vector<double> elos;
  std::vector<double> consistencies =
      judge_consistencies(table, judge_true_elos(world), elos);
  double r = pearson(consistencies, elos);
  return {r >= 0.9, "r = " + num(r) + " over " +
                        std::to_string(consistencies.size()) +
                        " judges (floor 0.9)"};
}

Outcome gate_convergence(const JudgeMatchupTable& table,
                         const SyntheticWorld& world) {
  EloTable judge_elos = judge_true_elos(world);
  auto sorted = convergence_curve(table, judge_elos, world.model_elos,
                                  ConvergenceStrategy::SortedByGap, 25,
                                  world.seed);
  auto random = convergence_curve(table, judge_elos, world.model_elos,
                                  ConvergenceStrategy::Random, 25,
                                  world.seed);
  double r10 = 0.0;
  for (const auto& point : sorted)
    if (point.matchup_count == 10) r10 = point.r;
  double final_sorted = sorted.back().r;
  double final_random = random.back().r;
  double share = r10 / final_sorted;
  bool ok = share >= 0.95 &&
            std::fabs(final_sorted - final_random) <= 1e-12;
  return {ok, "sorted k=10 at " + num(100.0 * share, 1) +
                  "% of final r " + num(final_sorted) +
                  "; strategy finals agree within 1e-12"};
}

Outcome gate_bias_neutralization() {
  SyntheticWorld base;
  base.model_elos.entries = {{"base", 1000.0},    {"foe-030", 1030.0},
                             {"foe-060", 1060.0}, {"foe-100", 1100.0},
                             {"foe-150", 1150.0}, {"foe-220", 1220.0},
                             {"foe-300", 1300.0}};
  for (const auto& [model, elo] : base.model_elos.entries)
    if (model != "base")
      base.matchups.emplace_back(MatchupKey("base", model), 40);
  for (int i = 0; i < 6; ++i) {
    SyntheticJudge judge;
    judge.judge_id = "judge-" + std::to_string(i);
    judge.skill = i / 5.0;
    judge.tie_rate = 0.05;
    judge.true_elo = 1000.0 + 100.0 * judge.skill;
    base.judges.push_back(judge);
  }

  auto mean_abs_shift = [&](Scheduling scheduling) {
    double total = 0.0;
    for (int s = 0; s < 100; ++s) {
      SyntheticWorld plain = base;
      plain.seed = 900 + s;
      SyntheticWorld biased = plain;
      for (auto& judge : biased.judges) judge.position_bias = 0.3;

      JudgeMatchupTable t_plain = simulate_tournament(plain, scheduling);
      JudgeMatchupTable t_biased = simulate_tournament(biased, scheduling);
      std::vector<double> unused_p, unused_b;
      std::vector<double> c_plain =
          judge_consistencies(t_plain, judge_true_elos(plain), unused_p);
      std::vector<double> c_biased =
          judge_consistencies(t_biased, judge_true_elos(biased), unused_b);
      double per_seed = 0.0;
      for (std::size_t j = 0; j < c_plain.size(); ++j)
        per_seed += std::fabs(c_biased[j] - c_plain[j]);
      total += per_seed / c_plain.size();
    }
    return total / 100.0;
  };

  double balanced = mean_abs_shift(Scheduling::Balanced);
  double unbalanced = mean_abs_shift(Scheduling::CanonicalFirst);
  bool ok = balanced < 0.02 && unbalanced > 0.02;
  return {ok, "mean |consistency shift| balanced " + num(balanced) +
                  " (< 0.02), first-slot-only " + num(unbalanced) +
                  " (> 0.02), 100 seeds"};
}

Outcome gate_variance_vs_gap(const JudgeMatchupTable& table,
                             const SyntheticWorld& world) {
  std::vector<double> gaps, vovs;
  for (const auto& [key, n] : world.matchups) {
    std::map<ModelId, double> per_judge;
    for (const auto& [judge, cells] : table)
      per_judge[judge] = cells.at(key).variance;
    gaps.push_back(world.model_elos.gap(key));
    vovs.push_back(variance_of_variance(per_judge));
  }
  double r = pearson(vovs, gaps);
  return {r > 0.5, "r = " + num(r) + " over " +
                       std::to_string(gaps.size()) +
                       " matchups (floor 0.5)"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      files[fs::relative(entry.path(), dir).string()] =
          io::read_file(entry.path());
  return files;
}

Outcome gate_determinism(const fs::path& tmp) {
  const std::string contests = (kData / "contests_2800.jsonl").string();
  const std::string world = (kData / "world_recovery.json").string();
  const std::string model_elos = (kData / "table2_elo.csv").string();

  SyntheticWorld recovery = load_world(world);
  std::string roster_csv = "model,elo\n";
  for (const auto& judge : recovery.judges)
    roster_csv += judge.judge_id + ',' + io::fmt_double(judge.true_elo) +
                  '\n';
  fs::path judge_elos = tmp / "judge_elos.csv";
  io::atomic_write_file(judge_elos, roster_csv);

  auto pass_dir = [&](const std::string& name, char run) {
    return (tmp / (name + std::string(1, run))).string();
  };
  auto both = [&](const std::string& name,
                  std::vector<std::string> args) {
    std::size_t compared = 0;
    for (char run : {'A', 'B'}) {
      auto with_out = args;
      with_out.push_back("--out");
      with_out.push_back(pass_dir(name, run));
      run_or_die(with_out);
    }
    auto a = snapshot(pass_dir(name, 'A'));
    auto b = snapshot(pass_dir(name, 'B'));
    if (a != b)
      throw Error("command \"" + name + "\" is not rerun-stable");
    compared = a.size();
    return compared;
  };

  std::size_t files = 0;
  files += both("validate", {"validate", "--contests", contests});
  files += both("judge", {"judge", "--contests", contests, "--world", world,
                          "--judges", "judge-00,judge-08,judge-16,judge-23",
                          "--seed", "11"});
  std::string verdicts = pass_dir("judge", 'A') + "/verdicts.jsonl";
  files += both("score", {"score", "--contests", contests, "--verdicts",
                          verdicts, "--judge-elos", judge_elos.string()});
  std::string per_judge = pass_dir("score", 'A') + "/per_judge.csv";
  files += both("correlate", {"correlate", "--consistency", per_judge,
                              "--seed", "11"});
  files += both("converge", {"converge", "--contests", contests,
                             "--verdicts", verdicts, "--judge-elos",
                             judge_elos.string(), "--model-elos", model_elos,
                             "--seed", "11"});
  files += both("simulate", {"simulate", "--world", world});
  return {true, "6 commands rerun byte-identical (" +
                    std::to_string(files) + " files compared)"};
}

}  // namespace

int main() {
  fs::path tmp = fs::temp_directory_path() / "verdict-acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  int failures = 0;
  int index = 0;
  auto gate = [&](const std::string& name, std::function<Outcome()> fn) {
    ++index;
    auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unexpected error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::printf("[%s] %2d %-28s %s (%.1fs)\n",
                outcome.ok ? "PASS" : "FAIL", index, name.c_str(),
                outcome.detail.c_str(), secs);
    if (!outcome.ok) ++failures;
  };

  nlohmann::json summary;
  gate("packaged-table correlation", [&] {
    summary = correlate_packaged_table(tmp / "table1");
    return gate_correlation(summary);
  });
  gate("packaged-table regression", [&] { return gate_mae(summary); });
  gate("packaged-table rank order",
       [&] { return gate_displacement(summary); });
  gate("gap-sorted matchup order", gate_gap_order);
  gate("exact-score equivalence", gate_exact_scores);
  gate("variance estimator bias", gate_estimator_bias);

  SyntheticWorld recovery;
  JudgeMatchupTable tournament;
  gate("skill recovery", [&] {
    recovery = load_world(kData / "world_recovery.json");
    tournament = simulate_tournament(recovery, Scheduling::Balanced);
    return gate_skill_recovery(tournament, recovery);
  });
  gate("convergence front-loading",
       [&] { return gate_convergence(tournament, recovery); });
  gate("position-bias neutralization", gate_bias_neutralization);
  gate("variance spread vs gap",
       [&] { return gate_variance_vs_gap(tournament, recovery); });
  gate("rerun determinism", [&] { return gate_determinism(tmp); });

  if (failures == 0) {
    std::printf("acceptance: all %d gates passed\n", index);
    return 0;
  }
  std::printf("acceptance: %d of %d gates FAILED\n", failures, index);
  return 1;
}
