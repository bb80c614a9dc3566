#include "verdict/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "verdict/contest_data.hpp"
#include "verdict/io.hpp"
#include "verdict/judging.hpp"
#include "verdict/simulation.hpp"
#include "verdict/stats.hpp"

namespace verdict {

namespace {

using ordered_json = nlohmann::ordered_json;

struct ConsistencyRow {
  ModelId judge;
  double elo = 0.0;
  double consistency = 0.0;
};

// CSV with header "judge,elo,consistency" — the per-judge report format,
// accepted back as input by correlate.
std::vector<ConsistencyRow> load_consistency_table(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open consistency table: " + path.string());
  std::vector<ConsistencyRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = io::trim(line);
    if (body.empty()) continue;
    auto fields = io::split_csv_line(body);
    if (!header_seen) {
      if (fields.size() != 3 || io::trim(fields[0]) != "judge" ||
          io::trim(fields[1]) != "elo" ||
          io::trim(fields[2]) != "consistency")
        throw ParseError(path.filename().string() +
                         ": expected header \"judge,elo,consistency\"");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) + ": expected 3 fields");
    ConsistencyRow row;
    row.judge = io::trim(fields[0]);
    try {
      row.elo = std::stod(io::trim(fields[1]));
      row.consistency = std::stod(io::trim(fields[2]));
    } catch (const std::invalid_argument&) {
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) + ": not a number");
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen)
    throw ParseError(path.filename().string() + ": empty consistency table");
  return rows;
}

void require_path(const std::filesystem::path& path, const char* what) {
  if (path.empty())
    throw ConfigError(std::string("missing required input: ") + what);
}

std::string per_matchup_csv(const JudgeMatchupTable& table) {
  std::string csv = "judge,model_lo,model_hi,n,wins_lo,ties,p,variance\n";
  for (const auto& [judge, cells] : table)
    for (const auto& [key, s] : cells) {
      csv += judge + ',' + key.model_lo + ',' + key.model_hi + ',' +
             std::to_string(s.n) + ',' + std::to_string(s.wins_lo) + ',' +
             std::to_string(s.ties) + ',' + io::fmt_double(s.p) + ',' +
             io::fmt_double(s.variance) + '\n';
    }
  return csv;
}

std::string per_judge_csv(const std::vector<ConsistencyRow>& rows) {
  std::string csv = "judge,elo,consistency\n";
  for (const auto& row : rows)
    csv += row.judge + ',' + io::fmt_double(row.elo) + ',' +
           io::fmt_double(row.consistency) + '\n';
  return csv;
}

std::string summary_csv(const CorrelationSummary& s) {
  std::string csv = "r,rank_displacement,slope,intercept,mae\n";
  csv += io::fmt_double(s.pearson_r) + ',' +
         io::fmt_double(s.mean_rank_displacement) + ',' +
         io::fmt_double(s.regression_slope) + ',' +
         io::fmt_double(s.regression_intercept) + ',' +
         io::fmt_double(s.regression_mae) + '\n';
  return csv;
}

ordered_json summary_json(const CorrelationSummary& s) {
  ordered_json j;
  j["r"] = io::fmt_double(s.pearson_r);
  j["rank_displacement"] = io::fmt_double(s.mean_rank_displacement);
  j["slope"] = io::fmt_double(s.regression_slope);
  j["intercept"] = io::fmt_double(s.regression_intercept);
  j["mae"] = io::fmt_double(s.regression_mae);
  j["n_judges"] = s.n_judges;
  return j;
}

std::string clusters_csv(const std::vector<ClusterResult>& clusters,
                         const std::vector<ConsistencyRow>& rows) {
  std::string csv = "cluster,centroid,size,r,members\n";
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cl = clusters[c];
    std::string members;
    for (std::size_t m : cl.members) {
      if (!members.empty()) members += ';';
      members += rows[m].judge;
    }
    csv += std::to_string(c + 1) + ',' + io::fmt_double(cl.centroid) + ',' +
           std::to_string(cl.members.size()) + ',' +
           (cl.r ? io::fmt_double(*cl.r) : std::string()) + ',' + members +
           '\n';
  }
  return csv;
}

// Shared tail of correlate/simulate: summary + clusters + optional gate.
int write_correlation_reports(const RunConfig& config,
                              const std::vector<ConsistencyRow>& rows,
                              ordered_json extra_summary, std::ostream& log) {
  std::vector<double> consistencies, elos;
  for (const auto& row : rows) {
    consistencies.push_back(row.consistency);
    elos.push_back(row.elo);
  }
  CorrelationSummary summary = summarize_correlation(consistencies, elos);
  std::vector<ClusterResult> clusters =
      cluster_correlations(consistencies, elos, config.cluster_k,
                           config.cluster_restarts, config.require_seed());

  io::atomic_write_file(config.out / "summary.csv", summary_csv(summary));
  ordered_json j = summary_json(summary);
  for (auto& [k, v] : extra_summary.items()) j[k] = v;
  io::atomic_write_file(config.out / "summary.json", j.dump(2) + "\n");
  io::atomic_write_file(config.out / "clusters.csv",
                        clusters_csv(clusters, rows));

  log << "judges: " << summary.n_judges
      << "  r: " << io::fmt_double(summary.pearson_r)
      << "  rank displacement: "
      << io::fmt_double(summary.mean_rank_displacement)
      << "  mae: " << io::fmt_double(summary.regression_mae) << "\n";
  for (std::size_t c = 0; c < clusters.size(); ++c)
    log << "cluster " << c + 1 << ": size " << clusters[c].members.size()
        << ", centroid " << io::fmt_double(clusters[c].centroid) << ", r "
        << (clusters[c].r ? io::fmt_double(*clusters[c].r) : "n/a") << "\n";

  if (config.min_pearson_r && summary.pearson_r < *config.min_pearson_r)
    throw ThresholdError("correlation " + io::fmt_double(summary.pearson_r) +
                         " is below the configured minimum " +
                         io::fmt_double(*config.min_pearson_r));
  return kExitOk;
}

std::string convergence_csv(
    const std::vector<std::pair<std::string, std::vector<ConvergencePoint>>>&
        curves) {
  std::string csv = "strategy,k,r\n";
  for (const auto& [name, curve] : curves)
    for (const auto& point : curve)
      csv += name + ',' + std::to_string(point.matchup_count) + ',' +
             io::fmt_double(point.r) + '\n';
  return csv;
}

// Builds (judge, matchup) tallies from a verdict log joined against the
// contest manifest. Failed verdicts are counted but not aggregated.
struct ScoredLog {
  JudgeMatchupTable table;
  std::size_t failures = 0;
  std::size_t verdicts = 0;
};

ScoredLog score_verdicts(const std::vector<ContestRecord>& contests,
                         const std::vector<JudgeVerdict>& verdicts) {
  std::map<std::string, const ContestRecord*> by_id;
  for (const auto& c : contests) by_id.emplace(c.contest_id, &c);

  std::map<ModelId, std::map<MatchupKey, std::vector<JudgeVerdict>>> grouped;
  ScoredLog scored;
  for (const auto& v : verdicts) {
    ++scored.verdicts;
    auto it = by_id.find(v.contest_id);
    if (it == by_id.end())
      throw ValidationError("verdict references an unknown contest: " +
                            v.contest_id);
    if (v.failed) {
      ++scored.failures;
      continue;
    }
    MatchupKey key(it->second->model_a, it->second->model_b);
    grouped[v.judge_id][key].push_back(v);
  }
  for (const auto& [judge, cells] : grouped)
    for (const auto& [key, vs] : cells)
      scored.table[judge].emplace(key, aggregate_matchup(key, judge, vs));
  return scored;
}

std::vector<ConsistencyRow> consistency_rows_from_table(
    const JudgeMatchupTable& table, const EloTable& judge_elos) {
  std::vector<ConsistencyRow> rows;
  for (const auto& [judge, cells] : table) {
    std::vector<MatchupStats> stats;
    stats.reserve(cells.size());
    for (const auto& [key, s] : cells) stats.push_back(s);
    ConsistencyRow row;
    row.judge = judge;
    row.elo = judge_elos.at(judge);
    row.consistency = consistency_score(mean_variance(stats));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::shared_ptr<Backend> make_backend(const RunConfig& config) {
  if (config.backend == "http")
    return std::make_shared<HttpBackend>(config.http);

  require_path(config.world, "world (the mock backend takes its judge "
                             "parameters and model ratings from it)");
  SyntheticWorld world = load_world(config.world);
  std::map<ModelId, SyntheticJudge> roster;
  for (const auto& judge : world.judges) roster[judge.judge_id] = judge;
  return std::make_shared<MockBackend>(std::move(roster),
                                       std::move(world.model_elos),
                                       world.seed, config.garble_rate);
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& log) {
  require_path(config.contests, "contests");
  DatasetScan scan = scan_contests(config.contests);
  MatchupMap matchups = group_matchups(scan.records);

  std::vector<std::string> below_min;
  for (const auto& [key, records] : matchups)
    if (records.size() < config.min_contests) below_min.push_back(key.str());

  std::vector<std::string> unrated;
  if (!config.model_elos.empty()) {
    EloTable elos = load_elo_table(config.model_elos);
    std::set<ModelId> models;
    for (const auto& [key, records] : matchups) {
      models.insert(key.model_lo);
      models.insert(key.model_hi);
    }
    for (const auto& model : models)
      if (!elos.contains(model)) unrated.push_back(model);
  }

  ordered_json report;
  report["lines"] = scan.lines;
  report["records"] = scan.records.size();
  report["matchups"] = matchups.size();
  report["errors"] = scan.errors;
  ordered_json counts = ordered_json::array();
  for (const auto& [key, records] : matchups) {
    ordered_json row;
    row["model_lo"] = key.model_lo;
    row["model_hi"] = key.model_hi;
    row["contests"] = records.size();
    counts.push_back(row);
  }
  report["matchup_contests"] = counts;
  report["below_min_contests"] = below_min;
  report["unrated_models"] = unrated;
  io::atomic_write_file(config.out / "validate_report.json",
                        report.dump(2) + "\n");

  log << scan.records.size() << " records across " << matchups.size()
      << " matchups (" << scan.errors.size() << " invalid lines)\n";
  for (const auto& e : scan.errors) log << "error: " << e << "\n";
  for (const auto& w : below_min)
    log << "warning: fewer than " << config.min_contests << " contests for "
        << w << "\n";
  for (const auto& m : unrated) log << "warning: no elo rating for " << m
                                    << "\n";
  return scan.errors.empty() ? kExitOk : kExitValidation;
}

int cmd_judge(const RunConfig& config, std::ostream& log) {
  require_path(config.contests, "contests");
  std::vector<ModelId> judges = config.judges;
  if (judges.empty() && !config.world.empty())
    for (const auto& judge : load_world(config.world).judges)
      judges.push_back(judge.judge_id);
  if (judges.empty())
    throw ConfigError("judge roster is empty; set \"judges\"");
  std::uint64_t seed = config.require_seed();

  std::vector<ContestRecord> contests = load_contests(config.contests);
  MatchupMap matchups =
      filter_matchups(group_matchups(contests), config.min_contests);
  if (matchups.empty())
    throw ValidationError("no matchup reaches the minimum contest count");

  GatewayConfig gw = config.gateway;
  gw.seed = seed;
  Gateway gateway(make_backend(config), gw);
  std::optional<DiskCache> cache;
  if (!config.cache_dir.empty()) cache.emplace(config.cache_dir);

  // One balanced schedule per matchup, shared by every judge.
  struct Task {
    const ContestRecord* contest;
    PresentationOrder order;
    ModelId judge;
  };
  std::vector<Task> tasks;
  for (const auto& judge : judges)
    for (const auto& [key, records] : matchups) {
      std::map<std::string, const ContestRecord*> by_id;
      for (const auto& r : records) by_id.emplace(r.contest_id, &r);
      for (const auto& [id, order] : schedule_orders(records, seed))
        tasks.push_back(Task{by_id.at(id), order, judge});
    }

  std::vector<JudgeVerdict> results(tasks.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mu);
        if (error) return;
      }
      try {
        results[i] = judge_contest(*tasks[i].contest, tasks[i].order,
                                   tasks[i].judge, gateway,
                                   cache ? &*cache : nullptr,
                                   config.judge_options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::size_t n_threads = std::min<std::size_t>(
      tasks.size(), static_cast<std::size_t>(
                        std::max(1, config.gateway.max_in_flight)));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  write_verdict_log(config.out / "verdicts.jsonl", results);

  std::map<ModelId, std::pair<std::size_t, std::size_t>> per_judge;
  for (const auto& v : results) {
    auto& [ok, failed] = per_judge[v.judge_id];
    v.failed ? ++failed : ++ok;
  }
  ordered_json summary;
  std::size_t total_failures = 0;
  for (const auto& [judge, counts] : per_judge) {
    ordered_json row;
    row["verdicts"] = counts.first;
    row["failures"] = counts.second;
    summary[judge] = row;
    total_failures += counts.second;
  }
  io::atomic_write_file(config.out / "judge_summary.json",
                        summary.dump(2) + "\n");

  log << results.size() << " elicitations across " << judges.size()
      << " judges and " << matchups.size() << " matchups; " << total_failures
      << " failures\n";
  return kExitOk;
}

int cmd_score(const RunConfig& config, std::ostream& log) {
  // Replication mode: a prepared per-judge table is echoed through the
  // same report path, so downstream commands can consume either source.
  if (!config.consistency.empty()) {
    std::vector<ConsistencyRow> rows =
        load_consistency_table(config.consistency);
    io::atomic_write_file(config.out / "per_judge.csv", per_judge_csv(rows));
    log << rows.size() << " judges echoed from "
        << config.consistency.string() << "\n";
    return kExitOk;
  }

  require_path(config.contests, "contests");
  require_path(config.verdicts, "verdicts");
  require_path(config.judge_elos, "judge_elos");

  std::vector<ContestRecord> contests = load_contests(config.contests);
  std::vector<JudgeVerdict> verdicts = load_verdict_log(config.verdicts);
  EloTable judge_elos = load_elo_table(config.judge_elos);

  ScoredLog scored = score_verdicts(contests, verdicts);
  if (scored.table.empty())
    throw ValidationError("verdict log holds no successful verdicts");

  std::vector<std::string> below_min;
  for (const auto& [judge, cells] : scored.table)
    for (const auto& [key, s] : cells)
      if (s.n < config.min_contests)
        below_min.push_back(judge + ": " + key.str() + " (" +
                            std::to_string(s.n) + ")");

  std::vector<ConsistencyRow> rows =
      consistency_rows_from_table(scored.table, judge_elos);

  io::atomic_write_file(config.out / "per_matchup.csv",
                        per_matchup_csv(scored.table));
  io::atomic_write_file(config.out / "per_judge.csv", per_judge_csv(rows));

  log << scored.verdicts << " verdicts (" << scored.failures
      << " failed) over " << scored.table.size() << " judges\n";
  for (const auto& w : below_min)
    log << "warning: below min contests after discards: " << w << "\n";
  for (const auto& row : rows)
    log << row.judge << ": consistency " << io::fmt_double(row.consistency)
        << "\n";
  return kExitOk;
}

int cmd_correlate(const RunConfig& config, std::ostream& log) {
  require_path(config.consistency, "consistency");
  std::vector<ConsistencyRow> rows =
      load_consistency_table(config.consistency);
  return write_correlation_reports(config, rows, ordered_json::object(), log);
}

int cmd_converge(const RunConfig& config, std::ostream& log) {
  require_path(config.contests, "contests");
  require_path(config.verdicts, "verdicts");
  require_path(config.judge_elos, "judge_elos");
  require_path(config.model_elos, "model_elos");
  std::uint64_t seed = config.require_seed();

  std::vector<ContestRecord> contests = load_contests(config.contests);
  std::vector<JudgeVerdict> verdicts = load_verdict_log(config.verdicts);
  EloTable judge_elos = load_elo_table(config.judge_elos);
  EloTable model_elos = load_elo_table(config.model_elos);
  ScoredLog scored = score_verdicts(contests, verdicts);

  std::vector<std::pair<std::string, std::vector<ConvergencePoint>>> curves;
  if (config.strategy == "random" || config.strategy == "both")
    curves.emplace_back("random", convergence_curve(
                                      scored.table, judge_elos, model_elos,
                                      ConvergenceStrategy::Random,
                                      config.permutations, seed));
  if (config.strategy == "sorted" || config.strategy == "both")
    curves.emplace_back("sorted", convergence_curve(
                                      scored.table, judge_elos, model_elos,
                                      ConvergenceStrategy::SortedByGap,
                                      config.permutations, seed));

  io::atomic_write_file(config.out / "convergence.csv",
                        convergence_csv(curves));
  for (const auto& [name, curve] : curves)
    log << name << ": final r " << io::fmt_double(curve.back().r) << " after "
        << curve.size() << " matchups\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  require_path(config.world, "world");
  SyntheticWorld world = load_world(config.world);
  if (config.seed) world.seed = *config.seed;

  JudgeMatchupTable table = simulate_tournament(world, Scheduling::Balanced);
  EloTable judge_elos = judge_true_elos(world);
  std::vector<ConsistencyRow> rows =
      consistency_rows_from_table(table, judge_elos);

  io::atomic_write_file(config.out / "per_matchup.csv",
                        per_matchup_csv(table));
  io::atomic_write_file(config.out / "per_judge.csv", per_judge_csv(rows));

  std::vector<std::pair<std::string, std::vector<ConvergencePoint>>> curves;
  if (config.strategy == "random" || config.strategy == "both")
    curves.emplace_back("random", convergence_curve(
                                      table, judge_elos, world.model_elos,
                                      ConvergenceStrategy::Random,
                                      config.permutations, world.seed));
  if (config.strategy == "sorted" || config.strategy == "both")
    curves.emplace_back("sorted", convergence_curve(
                                      table, judge_elos, world.model_elos,
                                      ConvergenceStrategy::SortedByGap,
                                      config.permutations, world.seed));
  io::atomic_write_file(config.out / "convergence.csv",
                        convergence_csv(curves));

  // Spread of per-judge verdict variance within each matchup, against the
  // matchup's elo gap: wide gaps separate strong from weak judges.
  std::string vov_csv = "model_lo,model_hi,gap,variance_of_variance\n";
  std::vector<double> gaps, vovs;
  for (const auto& [key, n] : world.matchups) {
    std::map<ModelId, double> per_judge_variance;
    for (const auto& [judge, cells] : table)
      per_judge_variance[judge] = cells.at(key).variance;
    double vov = variance_of_variance(per_judge_variance);
    double gap = world.model_elos.gap(key);
    gaps.push_back(gap);
    vovs.push_back(vov);
    vov_csv += key.model_lo + ',' + key.model_hi + ',' +
               io::fmt_double(gap) + ',' + io::fmt_double(vov) + '\n';
  }
  io::atomic_write_file(config.out / "variance_of_variance.csv", vov_csv);

  ordered_json extra;
  if (gaps.size() >= 2)
    extra["vov_gap_r"] = io::fmt_double(pearson(vovs, gaps));
  for (const auto& [name, curve] : curves)
    log << "convergence " << name << ": final r "
        << io::fmt_double(curve.back().r) << "\n";
  // Config seed (when given) overrides the world's own; RunConfig carries
  // no world seed, so thread the effective one through for clustering.
  RunConfig effective = config;
  effective.seed = world.seed;
  return write_correlation_reports(effective, rows, extra, log);
}

int run_cli(const std::vector<std::string>& args, std::ostream& log,
            std::ostream& err) {
  CLI::App app{"pairwise-verdict consistency harness"};
  app.require_subcommand(1);

  std::string config_path;
  RunConfig flags;  // flag values land here, then overlay the config file
  bool seed_set = false, min_contests_set = false, permutations_set = false;
  bool strategy_set = false, parse_mode_set = false, backend_set = false;
  bool out_set = false, judges_set = false, garble_set = false;
  std::uint64_t seed_flag = 0;
  std::size_t min_contests_flag = 20, permutations_flag = 25;
  std::string strategy_flag, parse_mode_flag, backend_flag;
  std::string out_flag, contests_flag, verdicts_flag, world_flag;
  std::string judge_elos_flag, model_elos_flag, consistency_flag;
  std::string cache_dir_flag;
  std::vector<std::string> judges_flag;
  double garble_flag = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed_flag, "deterministic run seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--judges", judges_flag,
                    "judge ids (repeat or comma-separate)")
        ->delimiter(',')
        ->each([&](const std::string&) { judges_set = true; });
    sub->add_option("--min-contests", min_contests_flag,
                    "minimum contests per matchup")
        ->each([&](const std::string&) { min_contests_set = true; });
    sub->add_option("--permutations", permutations_flag,
                    "random-strategy permutation count")
        ->each([&](const std::string&) { permutations_set = true; });
    sub->add_option("--strategy", strategy_flag, "random | sorted | both")
        ->each([&](const std::string&) { strategy_set = true; });
    sub->add_option("--parse-mode", parse_mode_flag, "strict | lenient")
        ->each([&](const std::string&) { parse_mode_set = true; });
    sub->add_option("--backend", backend_flag, "mock | http")
        ->each([&](const std::string&) { backend_set = true; });
    sub->add_option("--out", out_flag, "report directory")
        ->each([&](const std::string&) { out_set = true; });
    sub->add_option("--contests", contests_flag, "contest manifest (JSONL)");
    sub->add_option("--verdicts", verdicts_flag, "verdict log (JSONL)");
    sub->add_option("--world", world_flag, "synthetic world (JSON)");
    sub->add_option("--judge-elos", judge_elos_flag, "judge ratings (CSV)");
    sub->add_option("--model-elos", model_elos_flag, "model ratings (CSV)");
    sub->add_option("--consistency", consistency_flag,
                    "per-judge consistency table (CSV)");
    sub->add_option("--cache-dir", cache_dir_flag, "completion cache dir");
    sub->add_option("--garble-rate", garble_flag,
                    "mock backend reply noise in [0,1]")
        ->each([&](const std::string&) { garble_set = true; });
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "check a contest manifest and report its matchups");
  CLI::App* judge = app.add_subcommand(
      "judge", "run two-stage judging over every matchup and judge");
  CLI::App* score = app.add_subcommand(
      "score", "aggregate a verdict log into consistency scores");
  CLI::App* correlate = app.add_subcommand(
      "correlate", "relate consistency scores to elo ratings");
  CLI::App* converge = app.add_subcommand(
      "converge", "correlation as a function of matchup count");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "synthetic tournament end to end");
  for (CLI::App* sub :
       {validate, judge, score, correlate, converge, simulate})
    add_common(sub);

  std::vector<const char*> argv;
  argv.push_back("verdict");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      log << app.help();
      return kExitOk;
    }
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (seed_set) config.seed = seed_flag;
    if (judges_set) config.judges = judges_flag;
    if (min_contests_set) config.min_contests = min_contests_flag;
    if (permutations_set) config.permutations = permutations_flag;
    if (strategy_set) {
      if (strategy_flag != "random" && strategy_flag != "sorted" &&
          strategy_flag != "both")
        throw ConfigError("strategy must be random, sorted, or both");
      config.strategy = strategy_flag;
    }
    if (parse_mode_set)
      config.parse_mode = parse_mode_from_string(parse_mode_flag);
    if (backend_set) {
      if (backend_flag != "mock" && backend_flag != "http")
        throw ConfigError("backend must be mock or http");
      config.backend = backend_flag;
    }
    if (out_set) config.out = out_flag;
    if (!contests_flag.empty()) config.contests = contests_flag;
    if (!verdicts_flag.empty()) config.verdicts = verdicts_flag;
    if (!world_flag.empty()) config.world = world_flag;
    if (!judge_elos_flag.empty()) config.judge_elos = judge_elos_flag;
    if (!model_elos_flag.empty()) config.model_elos = model_elos_flag;
    if (!consistency_flag.empty()) config.consistency = consistency_flag;
    if (!cache_dir_flag.empty()) config.cache_dir = cache_dir_flag;
    if (garble_set) config.garble_rate = garble_flag;
    config.judge_options.parse_mode = config.parse_mode;

    if (validate->parsed()) return cmd_validate(config, log);
    if (judge->parsed()) return cmd_judge(config, log);
    if (score->parsed()) return cmd_score(config, log);
    if (correlate->parsed()) return cmd_correlate(config, log);
    if (converge->parsed()) return cmd_converge(config, log);
    return cmd_simulate(config, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ThresholdError& e) {
    err << "threshold not met: " << e.what() << "\n";
    return kExitThreshold;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const PermanentError& e) {
    err << "backend error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace verdict
