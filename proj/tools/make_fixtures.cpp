// Regenerates the packaged synthetic fixtures from the checked-in rating
// tables:
//   data/contests_2800.jsonl  - 70 matchups x 40 contests, both storage
//                               orientations (140 ordered pairs)
//   data/world_recovery.json  - the same matchup plan and contest counts,
//                               with a 24-judge roster of evenly spaced
//                               skills and affine ground-truth ratings
//   data/judge_elos_recovery.csv - that roster's ratings as a model,elo CSV
//                               for the score/correlate/converge commands
// Outputs are deterministic; run from the repository root.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "verdict/contest_data.hpp"
#include "verdict/io.hpp"
#include "verdict/simulation.hpp"

using namespace verdict;

int main(int argc, char** argv) {
  std::filesystem::path data = argc > 1 ? argv[1] : "data";
  try {
    EloTable model_elos = load_elo_table(data / "table2_elo.csv");
    std::vector<MatchupGapRow> plan_rows =
        load_matchup_gaps(data / "table3_matchups.csv");

    SyntheticWorld world;
    world.seed = 1;
    world.model_elos = model_elos;
    // 40 contests per matchup, matching the manifest shape: 20 per ordered
    // pair, i.e. 20 shown in each presentation order under a balanced
    // schedule.
    for (const auto& row : plan_rows)
      world.matchups.emplace_back(MatchupKey(row.model_a, row.model_b), 40);

    for (int i = 0; i < 24; ++i) {
      SyntheticJudge judge;
      char id[32];
      std::snprintf(id, sizeof id, "judge-%02d", i);
      judge.judge_id = id;
      judge.skill = static_cast<double>(i) / 23.0;
      judge.tie_rate = 0.05;
      judge.position_bias = 0.0;
      judge.true_elo = 1000.0 + 320.0 * judge.skill;
      world.judges.push_back(judge);
    }
    write_world(data / "world_recovery.json", world);

    std::string roster = "model,elo\n";
    for (const auto& judge : world.judges)
      roster += judge.judge_id + ',' + io::fmt_double(judge.true_elo) + '\n';
    io::atomic_write_file(data / "judge_elos_recovery.csv", roster);

    std::vector<ContestRecord> contests = make_synthetic_contests(world);
    write_contests(data / "contests_2800.jsonl", contests);

    std::cout << "wrote " << (data / "world_recovery.json").string()
              << ", the judge roster CSV, and " << contests.size()
              << " contests to " << (data / "contests_2800.jsonl").string()
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fixture generation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
