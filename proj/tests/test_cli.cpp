#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verdict/cli.hpp"
#include "verdict/contest_data.hpp"
#include "verdict/io.hpp"
#include "verdict/judging.hpp"
#include "verdict/simulation.hpp"
#include "verdict/types.hpp"

using namespace verdict;
namespace fs = std::filesystem;

namespace {

struct CliOutcome {
  int code = 0;
  std::string log;
  std::string err;
};

CliOutcome cli(const std::vector<std::string>& args) {
  std::ostringstream log, err;
  CliOutcome out;
  out.code = run_cli(args, log, err);
  out.log = log.str();
  out.err = err.str();
  return out;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "verdict-test-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Four judges spanning the skill range (the default cluster count needs
// more judges than clusters), three models, two matchups of six contests.
SyntheticWorld small_world() {
  SyntheticWorld world;
  world.seed = 4242;
  world.model_elos.entries = {{"ant", 1300.0}, {"bee", 1000.0},
                              {"cat", 800.0}};
  world.matchups.emplace_back(MatchupKey("ant", "bee"), 6);
  world.matchups.emplace_back(MatchupKey("bee", "cat"), 6);
  world.judges = {
      {"j-alpha", 0.95, 0.05, 0.0, 1150.0},
      {"j-beta", 0.70, 0.05, 0.0, 1100.0},
      {"j-gamma", 0.40, 0.05, 0.0, 1050.0},
      {"j-delta", 0.05, 0.05, 0.0, 1000.0},
  };
  return world;
}

// Writes the world, its contest manifest, and the two rating tables under
// `dir`; returns the manifest path alongside the other file paths via
// out-parameters kept as named members for readability.
struct WorldFiles {
  fs::path world;
  fs::path contests;
  fs::path judge_elos;
  fs::path model_elos;
};

WorldFiles write_world_files(const fs::path& dir) {
  SyntheticWorld world = small_world();
  WorldFiles files;
  files.world = dir / "world.json";
  files.contests = dir / "contests.jsonl";
  files.judge_elos = dir / "judge_elos.csv";
  files.model_elos = dir / "model_elos.csv";
  write_world(files.world, world);
  write_contests(files.contests, make_synthetic_contests(world));
  std::string judges = "model,elo\n";
  for (const auto& judge : world.judges)
    judges += judge.judge_id + ',' + io::fmt_double(judge.true_elo) + '\n';
  io::atomic_write_file(files.judge_elos, judges);
  std::string models = "model,elo\n";
  for (const auto& [model, elo] : world.model_elos.entries)
    models += model + ',' + io::fmt_double(elo) + '\n';
  io::atomic_write_file(files.model_elos, models);
  return files;
}

std::vector<std::string> data_lines(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!io::trim(line).empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) ++n;
  return n;
}

}  // namespace

TEST_CASE("cli: help and usage errors") {
  CliOutcome help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.log.find("simulate") != std::string::npos);
  CHECK(help.log.find("correlate") != std::string::npos);
  CHECK(help.err.empty());

  CliOutcome bare = cli({});
  CHECK(bare.code == kExitConfig);
  CHECK(bare.err.find("config error:") != std::string::npos);

  CliOutcome unknown = cli({"validate", "--frobnicate"});
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("config error:") != std::string::npos);
}

TEST_CASE("cli: validate reports a clean manifest") {
  fs::path dir = fresh_dir("validate-clean");
  WorldFiles files = write_world_files(dir);
  fs::path out = dir / "out";

  CliOutcome got = cli({"validate", "--contests", files.contests.string(),
                        "--min-contests", "4", "--out", out.string()});
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("12 records across 2 matchups (0 invalid lines)") !=
        std::string::npos);

  auto report = nlohmann::json::parse(io::read_file(out /
                                                    "validate_report.json"));
  CHECK(report["lines"] == 12);
  CHECK(report["records"] == 12);
  CHECK(report["matchups"] == 2);
  CHECK(report["errors"].empty());
  CHECK(report["below_min_contests"].empty());
  CHECK(report["unrated_models"].empty());
  REQUIRE(report["matchup_contests"].size() == 2);
  for (const auto& row : report["matchup_contests"])
    CHECK(row["contests"] == 6);

  SUBCASE("the default minimum flags small matchups without failing") {
    CliOutcome strict = cli({"validate", "--contests",
                             files.contests.string(), "--out", out.string()});
    CHECK(strict.code == kExitOk);
    auto again = nlohmann::json::parse(
        io::read_file(out / "validate_report.json"));
    CHECK(again["below_min_contests"].size() == 2);
    CHECK(strict.log.find("warning: fewer than 20 contests") !=
          std::string::npos);
  }

  SUBCASE("models missing from the rating table are named") {
    io::atomic_write_file(dir / "partial.csv", "model,elo\nant,1300\nbee,1000\n");
    CliOutcome partial =
        cli({"validate", "--contests", files.contests.string(),
             "--model-elos", (dir / "partial.csv").string(),
             "--min-contests", "4", "--out", out.string()});
    CHECK(partial.code == kExitOk);
    auto again = nlohmann::json::parse(
        io::read_file(out / "validate_report.json"));
    REQUIRE(again["unrated_models"].size() == 1);
    CHECK(again["unrated_models"][0] == "cat");
    CHECK(partial.log.find("warning: no elo rating for cat") !=
          std::string::npos);
  }
}

TEST_CASE("cli: validate flags malformed lines") {
  fs::path dir = fresh_dir("validate-broken");
  WorldFiles files = write_world_files(dir);
  std::string manifest = io::read_file(files.contests);
  manifest += "{nope\n";
  manifest +=
      R"({"contest_id":"bad-1","prompt":"p","model_a":"ant","model_b":"ant",)"
      R"("response_a":"x","response_b":"y"})"
      "\n";
  fs::path broken = dir / "broken.jsonl";
  io::atomic_write_file(broken, manifest);

  fs::path out = dir / "out";
  CliOutcome got = cli({"validate", "--contests", broken.string(),
                        "--min-contests", "4", "--out", out.string()});
  CHECK(got.code == kExitValidation);
  CHECK(got.log.find("(2 invalid lines)") != std::string::npos);
  CHECK(got.log.find("line 13: not valid JSON") != std::string::npos);

  auto report = nlohmann::json::parse(io::read_file(out /
                                                    "validate_report.json"));
  CHECK(report["errors"].size() == 2);
  CHECK(report["records"] == 12);
}

TEST_CASE("cli: judge runs the two-stage pipeline deterministically") {
  fs::path dir = fresh_dir("judge-pipeline");
  WorldFiles files = write_world_files(dir);
  fs::path out = dir / "out";

  std::vector<std::string> args = {
      "judge",          "--contests", files.contests.string(),
      "--world",        files.world.string(),
      "--judges",       "j-alpha,j-beta,j-gamma,j-delta",
      "--seed",         "7",
      "--min-contests", "4",
      "--out",          out.string()};
  CliOutcome got = cli(args);
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("48 elicitations across 4 judges and 2 matchups; "
                     "0 failures") != std::string::npos);

  CHECK(data_lines(out / "verdicts.jsonl").size() == 48);
  auto summary = nlohmann::json::parse(io::read_file(out /
                                                     "judge_summary.json"));
  REQUIRE(summary.size() == 4);
  for (const auto& judge : {"j-alpha", "j-beta", "j-gamma", "j-delta"}) {
    CHECK(summary[judge]["verdicts"] == 12);
    CHECK(summary[judge]["failures"] == 0);
  }

  SUBCASE("a rerun with the same seed is byte-identical") {
    fs::path out2 = dir / "out2";
    std::vector<std::string> rerun = args;
    rerun.back() = out2.string();
    CHECK(cli(rerun).code == kExitOk);
    CHECK(io::read_file(out2 / "verdicts.jsonl") ==
          io::read_file(out / "verdicts.jsonl"));
  }

  SUBCASE("a different seed reshuffles the presentation schedule") {
    fs::path out3 = dir / "out3";
    std::vector<std::string> reseeded = args;
    reseeded[8] = "8";
    reseeded.back() = out3.string();
    CHECK(cli(reseeded).code == kExitOk);
    CHECK(io::read_file(out3 / "verdicts.jsonl") !=
          io::read_file(out / "verdicts.jsonl"));
  }

  SUBCASE("the roster defaults to every judge in the world file") {
    fs::path out4 = dir / "out4";
    CliOutcome defaulted = cli({"judge", "--contests",
                                files.contests.string(), "--world",
                                files.world.string(), "--seed", "7",
                                "--min-contests", "4", "--out",
                                out4.string()});
    CHECK(defaulted.code == kExitOk);
    CHECK(io::read_file(out4 / "verdicts.jsonl") ==
          io::read_file(out / "verdicts.jsonl"));
  }
}

TEST_CASE("cli: cached judging reuses completions") {
  fs::path dir = fresh_dir("judge-cache");
  WorldFiles files = write_world_files(dir);
  fs::path cache = dir / "cache";
  fs::path out1 = dir / "run1";
  fs::path out2 = dir / "run2";

  auto run = [&](const fs::path& out) {
    return cli({"judge", "--contests", files.contests.string(), "--world",
                files.world.string(), "--judges",
                "j-alpha,j-beta,j-gamma,j-delta", "--seed", "7",
                "--min-contests", "4", "--cache-dir", cache.string(), "--out",
                out.string()});
  };
  CHECK(run(out1).code == kExitOk);
  // One entry per distinct request: 48 reasoning calls, plus preference
  // calls deduplicated wherever two contests elicit identical reasoning.
  std::size_t entries = count_files(cache);
  CHECK(entries > 48);
  CHECK(entries <= 96);

  CHECK(run(out2).code == kExitOk);
  CHECK(count_files(cache) == entries);
  CHECK(io::read_file(out2 / "verdicts.jsonl") ==
        io::read_file(out1 / "verdicts.jsonl"));
}

TEST_CASE("cli: score aggregates a verdict log") {
  fs::path dir = fresh_dir("score");
  WorldFiles files = write_world_files(dir);
  fs::path judged = dir / "judged";
  REQUIRE(cli({"judge", "--contests", files.contests.string(), "--world",
               files.world.string(), "--judges",
               "j-alpha,j-beta,j-gamma,j-delta", "--seed", "7",
               "--min-contests", "4", "--out", judged.string()})
              .code == kExitOk);

  fs::path out = dir / "out";
  CliOutcome got = cli({"score", "--contests", files.contests.string(),
                        "--verdicts", (judged / "verdicts.jsonl").string(),
                        "--judge-elos", files.judge_elos.string(),
                        "--min-contests", "4", "--out", out.string()});
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("48 verdicts (0 failed) over 4 judges") !=
        std::string::npos);

  auto matchup_rows = data_lines(out / "per_matchup.csv");
  REQUIRE(matchup_rows.size() == 9);  // header + 4 judges x 2 matchups
  CHECK(matchup_rows[0] == "judge,model_lo,model_hi,n,wins_lo,ties,p,variance");
  for (std::size_t i = 1; i < matchup_rows.size(); ++i) {
    auto fields = io::split_csv_line(matchup_rows[i]);
    REQUIRE(fields.size() == 8);
    CHECK(fields[3] == "6");
  }

  auto judge_rows = data_lines(out / "per_judge.csv");
  REQUIRE(judge_rows.size() == 5);
  CHECK(judge_rows[0] == "judge,elo,consistency");
  for (std::size_t i = 1; i < judge_rows.size(); ++i) {
    auto fields = io::split_csv_line(judge_rows[i]);
    REQUIRE(fields.size() == 3);
    double consistency = std::stod(fields[2]);
    CHECK(consistency >= 0.0);
    CHECK(consistency <= 1.0);
  }

  SUBCASE("a prepared table is echoed through the same report path") {
    fs::path echo = dir / "echo";
    CliOutcome echoed =
        cli({"score", "--consistency", (out / "per_judge.csv").string(),
             "--out", echo.string()});
    CHECK(echoed.code == kExitOk);
    CHECK(echoed.log.find("4 judges echoed") != std::string::npos);
    CHECK(io::read_file(echo / "per_judge.csv") ==
          io::read_file(out / "per_judge.csv"));
  }

  SUBCASE("a verdict naming an unknown contest is rejected") {
    JudgeVerdict stray;
    stray.contest_id = "c-zzz";
    stray.judge_id = "j-alpha";
    stray.order = PresentationOrder::AB;
    stray.reasoning = "r";
    stray.choice = Choice::Tie;
    write_verdict_log(dir / "stray.jsonl", {stray});
    CliOutcome bad = cli({"score", "--contests", files.contests.string(),
                          "--verdicts", (dir / "stray.jsonl").string(),
                          "--judge-elos", files.judge_elos.string(), "--out",
                          (dir / "bad").string()});
    CHECK(bad.code == kExitValidation);
    CHECK(bad.err.find("unknown contest: c-zzz") != std::string::npos);
  }
}

TEST_CASE("cli: correlate writes summary and clusters") {
  fs::path dir = fresh_dir("correlate");
  fs::path table = dir / "per_judge.csv";
  io::atomic_write_file(table,
                        "judge,elo,consistency\n"
                        "j-alpha,1150,0.82\n"
                        "j-beta,1100,0.74\n"
                        "j-gamma,1050,0.55\n"
                        "j-delta,1000,0.41\n");
  fs::path out = dir / "out";

  CliOutcome got = cli({"correlate", "--consistency", table.string(),
                        "--seed", "7", "--out", out.string()});
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("judges: 4") != std::string::npos);

  auto summary = nlohmann::json::parse(io::read_file(out / "summary.json"));
  CHECK(summary["n_judges"] == 4);
  double r = std::stod(summary["r"].get<std::string>());
  CHECK(r > 0.9);  // the table above is nearly linear

  auto summary_rows = data_lines(out / "summary.csv");
  REQUIRE(summary_rows.size() == 2);
  CHECK(summary_rows[0] == "r,rank_displacement,slope,intercept,mae");

  auto cluster_rows = data_lines(out / "clusters.csv");
  REQUIRE(cluster_rows.size() == 4);  // header + default three clusters
  CHECK(cluster_rows[0] == "cluster,centroid,size,r,members");
  std::set<std::string> members;
  std::size_t total = 0;
  for (std::size_t i = 1; i < cluster_rows.size(); ++i) {
    auto fields = io::split_csv_line(cluster_rows[i]);
    REQUIRE(fields.size() == 5);
    total += std::stoul(fields[2]);
    for (const auto& id : split_on(fields[4], ';')) members.insert(id);
  }
  CHECK(total == 4);
  CHECK(members == std::set<std::string>{"j-alpha", "j-beta", "j-gamma",
                                         "j-delta"});

  SUBCASE("clustering requires a seed") {
    CliOutcome unseeded = cli({"correlate", "--consistency", table.string(),
                               "--out", (dir / "unseeded").string()});
    CHECK(unseeded.code == kExitConfig);
    CHECK(unseeded.err.find("no seed given") != std::string::npos);
  }

  SUBCASE("fewer judges than clusters is a validation error") {
    fs::path three = dir / "three.csv";
    io::atomic_write_file(three,
                          "judge,elo,consistency\n"
                          "j-alpha,1150,0.82\n"
                          "j-beta,1100,0.74\n"
                          "j-gamma,1050,0.55\n");
    CliOutcome small = cli({"correlate", "--consistency", three.string(),
                            "--seed", "7", "--out",
                            (dir / "small").string()});
    CHECK(small.code == kExitValidation);
    CHECK(small.err.find("error:") != std::string::npos);
  }

  SUBCASE("an unmet correlation floor exits with the threshold code") {
    fs::path gated = dir / "gated";
    nlohmann::ordered_json cfg;
    cfg["seed"] = 7;
    cfg["consistency"] = table.string();
    cfg["out"] = gated.string();
    cfg["min_pearson_r"] = 1.01;  // unreachable on purpose
    io::atomic_write_file(dir / "gate.json", cfg.dump(2) + "\n");
    CliOutcome gate = cli({"correlate", "--config",
                           (dir / "gate.json").string()});
    CHECK(gate.code == kExitThreshold);
    CHECK(gate.err.find("threshold not met") != std::string::npos);
    CHECK(gate.err.find("below the configured minimum") != std::string::npos);
    // Reports land before the gate fires so the failure is inspectable.
    CHECK(fs::exists(gated / "summary.csv"));
  }
}

TEST_CASE("cli: converge produces per-strategy curves") {
  fs::path dir = fresh_dir("converge");
  WorldFiles files = write_world_files(dir);
  fs::path judged = dir / "judged";
  REQUIRE(cli({"judge", "--contests", files.contests.string(), "--world",
               files.world.string(), "--judges",
               "j-alpha,j-beta,j-gamma,j-delta", "--seed", "7",
               "--min-contests", "4", "--out", judged.string()})
              .code == kExitOk);

  fs::path out = dir / "out";
  CliOutcome got = cli({"converge", "--contests", files.contests.string(),
                        "--verdicts", (judged / "verdicts.jsonl").string(),
                        "--judge-elos", files.judge_elos.string(),
                        "--model-elos", files.model_elos.string(), "--seed",
                        "7", "--permutations", "5", "--out", out.string()});
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("random: final r") != std::string::npos);
  CHECK(got.log.find("sorted: final r") != std::string::npos);

  auto rows = data_lines(out / "convergence.csv");
  REQUIRE(rows.size() == 5);  // header + two strategies x two matchup counts
  CHECK(rows[0] == "strategy,k,r");
  std::map<std::string, std::map<int, double>> curves;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto fields = io::split_csv_line(rows[i]);
    REQUIRE(fields.size() == 3);
    curves[fields[0]][std::stoi(fields[1])] = std::stod(fields[2]);
  }
  REQUIRE(curves.count("random") == 1);
  REQUIRE(curves.count("sorted") == 1);
  // At the full matchup count every permutation sees the same table.
  CHECK(curves["random"][2] == doctest::Approx(curves["sorted"][2])
                                   .epsilon(1e-12));

  SUBCASE("a single strategy writes a single curve") {
    fs::path sorted_out = dir / "sorted";
    CliOutcome sorted =
        cli({"converge", "--contests", files.contests.string(), "--verdicts",
             (judged / "verdicts.jsonl").string(), "--judge-elos",
             files.judge_elos.string(), "--model-elos",
             files.model_elos.string(), "--seed", "7", "--permutations", "5",
             "--strategy", "sorted", "--out", sorted_out.string()});
    CHECK(sorted.code == kExitOk);
    CHECK(data_lines(sorted_out / "convergence.csv").size() == 3);
    CHECK(sorted.log.find("random") == std::string::npos);
  }
}

TEST_CASE("cli: simulate runs a synthetic world end to end") {
  fs::path dir = fresh_dir("simulate");
  WorldFiles files = write_world_files(dir);
  fs::path out = dir / "out";

  CliOutcome got = cli({"simulate", "--world", files.world.string(), "--seed",
                        "11", "--permutations", "5", "--out", out.string()});
  CHECK(got.code == kExitOk);
  CHECK(got.log.find("judges: 4") != std::string::npos);
  CHECK(got.log.find("convergence sorted: final r") != std::string::npos);

  CHECK(data_lines(out / "per_matchup.csv").size() == 9);
  CHECK(data_lines(out / "per_judge.csv").size() == 5);
  CHECK(data_lines(out / "convergence.csv").size() == 5);
  auto vov_rows = data_lines(out / "variance_of_variance.csv");
  REQUIRE(vov_rows.size() == 3);
  CHECK(vov_rows[0] == "model_lo,model_hi,gap,variance_of_variance");
  auto summary = nlohmann::json::parse(io::read_file(out / "summary.json"));
  CHECK(summary.contains("vov_gap_r"));
  CHECK(summary["n_judges"] == 4);
  CHECK(fs::exists(out / "clusters.csv"));

  SUBCASE("reruns are byte-identical") {
    fs::path out2 = dir / "out2";
    CHECK(cli({"simulate", "--world", files.world.string(), "--seed", "11",
               "--permutations", "5", "--out", out2.string()})
              .code == kExitOk);
    for (const char* name : {"per_matchup.csv", "per_judge.csv",
                             "convergence.csv", "summary.json"})
      CHECK(io::read_file(out2 / name) == io::read_file(out / name));
  }

  SUBCASE("the seed flag overrides the world seed") {
    fs::path out3 = dir / "out3";
    CHECK(cli({"simulate", "--world", files.world.string(), "--seed", "12",
               "--permutations", "5", "--out", out3.string()})
              .code == kExitOk);
    CHECK(io::read_file(out3 / "per_matchup.csv") !=
          io::read_file(out / "per_matchup.csv"));
  }
}

TEST_CASE("cli: missing inputs and bad values exit with config errors") {
  fs::path dir = fresh_dir("config-errors");
  WorldFiles files = write_world_files(dir);

  CliOutcome no_contests = cli({"score", "--out", (dir / "o1").string()});
  CHECK(no_contests.code == kExitConfig);
  CHECK(no_contests.err.find("missing required input: contests") !=
        std::string::npos);

  CliOutcome no_seed = cli({"judge", "--contests", files.contests.string(),
                            "--world", files.world.string(), "--judges",
                            "j-alpha", "--out", (dir / "o2").string()});
  CHECK(no_seed.code == kExitConfig);
  CHECK(no_seed.err.find("no seed given") != std::string::npos);

  // Without a world file there is nothing to default the roster from.
  CliOutcome no_judges = cli({"judge", "--contests", files.contests.string(),
                              "--backend", "http", "--seed", "1", "--out",
                              (dir / "o3").string()});
  CHECK(no_judges.code == kExitConfig);
  CHECK(no_judges.err.find("judge roster is empty") != std::string::npos);

  CHECK(cli({"simulate", "--world", files.world.string(), "--strategy",
             "weird"})
            .code == kExitConfig);
  CHECK(cli({"simulate", "--world", files.world.string(), "--parse-mode",
             "fuzzy"})
            .code == kExitConfig);
  CHECK(cli({"judge", "--contests", files.contests.string(), "--backend",
             "carrier"})
            .code == kExitConfig);

  SUBCASE("config files are checked before use") {
    io::atomic_write_file(dir / "unknown.json", "{\"zork\": 1}\n");
    CliOutcome unknown = cli({"simulate", "--config",
                              (dir / "unknown.json").string()});
    CHECK(unknown.code == kExitConfig);
    CHECK(unknown.err.find("unknown config key: zork") != std::string::npos);

    io::atomic_write_file(dir / "mangled.json", "{nope\n");
    CliOutcome mangled = cli({"simulate", "--config",
                              (dir / "mangled.json").string()});
    CHECK(mangled.code == kExitConfig);
    CHECK(mangled.err.find("not valid JSON") != std::string::npos);
  }

  SUBCASE("data errors map to the validation exit code") {
    CliOutcome missing = cli({"validate", "--contests",
                              (dir / "nowhere.jsonl").string(), "--out",
                              (dir / "o4").string()});
    CHECK(missing.code == kExitValidation);
    CHECK(missing.err.find("error:") != std::string::npos);

    // Every matchup is below the default minimum, so judging has nothing
    // left to elicit.
    CliOutcome starved = cli({"judge", "--contests", files.contests.string(),
                              "--world", files.world.string(), "--judges",
                              "j-alpha", "--seed", "1", "--out",
                              (dir / "o5").string()});
    CHECK(starved.code == kExitValidation);
    CHECK(starved.err.find("no matchup reaches the minimum") !=
          std::string::npos);
  }
}
