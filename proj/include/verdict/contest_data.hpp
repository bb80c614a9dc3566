#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "verdict/types.hpp"

namespace verdict {

using MatchupMap = std::map<MatchupKey, std::vector<ContestRecord>>;

// Result of scanning a contest manifest: valid records plus one message per
// rejected line (malformed JSON, missing/empty field, self-matchup,
// duplicate contest id), each naming the line number.
struct DatasetScan {
  std::vector<ContestRecord> records;
  std::vector<std::string> errors;
  std::size_t lines = 0;
};

// Lenient scan: collects per-line errors instead of throwing.
DatasetScan scan_contests(const std::filesystem::path& path);

// Strict load: throws ParseError/ValidationError on the first bad line.
std::vector<ContestRecord> load_contests(const std::filesystem::path& path);

// CSV with header "model,elo".
EloTable load_elo_table(const std::filesystem::path& path);

// One row of a matchup plan table: an ordered pair as printed plus its
// stated Elo gap. CSV with header "model_a,model_b,gap".
struct MatchupGapRow {
  ModelId model_a;
  ModelId model_b;
  double gap = 0.0;
};

std::vector<MatchupGapRow> load_matchup_gaps(
    const std::filesystem::path& path);

// Groups records under canonical matchup keys. The union of the groups is
// exactly the input; storage orientation does not affect grouping.
MatchupMap group_matchups(const std::vector<ContestRecord>& records);

// Drops matchups with fewer than `min_contests` records.
MatchupMap filter_matchups(const MatchupMap& matchups,
                           std::size_t min_contests);

// The `k` matchups with the largest Elo gap, descending; ties broken by
// canonical key order so the result is total and deterministic. Throws
// LookupError naming the first model missing from `elos`.
std::vector<MatchupKey> select_matchups_by_elo_gap(const MatchupMap& matchups,
                                                   const EloTable& elos,
                                                   std::size_t k);

// Same ordering over an explicit key list (used by convergence analysis).
std::vector<MatchupKey> sort_keys_by_elo_gap(std::vector<MatchupKey> keys,
                                             const EloTable& elos);

// Serializes one record as a single JSONL line (stable key order).
std::string contest_to_jsonl(const ContestRecord& record);

// Writes a manifest atomically, one record per line.
void write_contests(const std::filesystem::path& path,
                    const std::vector<ContestRecord>& records);

}  // namespace verdict
