#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "verdict/gateway.hpp"
#include "verdict/prompts.hpp"
#include "verdict/types.hpp"

namespace verdict {

using OrderPlan = std::vector<std::pair<std::string, PresentationOrder>>;

// Assigns each contest of one matchup a presentation order such that
// |#AB - #BA| <= 1. Assignment is a pure function of (matchup, contest id
// set, seed): ids are sorted, shuffled with a stream derived from
// (seed, matchup), and split half/half; an odd leftover gets AB or BA by a
// seeded hash of its id. Results are returned in input order and shared by
// every judge so each judge sees a balanced schedule. Throws
// ValidationError if the ids are not distinct.
OrderPlan schedule_order_ids(const MatchupKey& key,
                             const std::vector<std::string>& contest_ids,
                             std::uint64_t seed);

// Convenience over records; all records must belong to one matchup.
OrderPlan schedule_orders(const std::vector<ContestRecord>& contests,
                          std::uint64_t seed);

// Maps a presentation-space choice back to stored-model space.
// nullopt = tie.
std::optional<ModelId> resolve_winner(const ContestRecord& contest,
                                      PresentationOrder order, Choice choice);

struct JudgeOptions {
  ParseMode parse_mode = ParseMode::Strict;
  int parse_retries = 2;  // fresh stage-2 attempts after the first parse fail
  int max_tokens_reasoning = 1024;
  int max_tokens_preference = 8;
  double temperature = 0.0;
};

// Runs the two-stage elicitation for one contest: reasoning prompt, then
// preference prompt over the returned passage, then parse. A parse failure
// retries stage 2 with the cache bypassed (a cached malformed reply would
// never heal); a successful retry overwrites the cache entry. Transport
// exhaustion and non-auth permanent errors are recorded as failed verdicts;
// auth errors propagate.
JudgeVerdict judge_contest(const ContestRecord& contest,
                           PresentationOrder order, const ModelId& judge_id,
                           Gateway& gateway, DiskCache* cache,
                           const JudgeOptions& options);

// Tallies non-failed verdicts of one (judge, matchup) into MatchupStats:
// p = (wins_lo + 0.5 * ties) / n, variance = p * (1 - p). Throws
// ValidationError on an empty set, a foreign judge id, or a winner outside
// the matchup.
MatchupStats aggregate_matchup(const MatchupKey& key, const ModelId& judge_id,
                               const std::vector<JudgeVerdict>& verdicts);

// Verdict-log JSONL (one line per elicitation, failures included).
std::string verdict_to_jsonl(const JudgeVerdict& verdict);
JudgeVerdict verdict_from_jsonl(const std::string& line);
void write_verdict_log(const std::filesystem::path& path,
                       const std::vector<JudgeVerdict>& verdicts);
std::vector<JudgeVerdict> load_verdict_log(const std::filesystem::path& path);

}  // namespace verdict
