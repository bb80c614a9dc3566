#include "verdict/judging.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "verdict/io.hpp"
#include "verdict/rng.hpp"

namespace verdict {

namespace {

constexpr std::uint64_t kScheduleSalt = 0x73636865ULL;
constexpr std::uint64_t kOddContestSalt = 0x6f6464ULL;

std::string truncate_for_log(const std::string& s, std::size_t limit = 200) {
  if (s.size() <= limit) return s;
  return s.substr(0, limit) + "...";
}

}  // namespace

OrderPlan schedule_order_ids(const MatchupKey& key,
                             const std::vector<std::string>& contest_ids,
                             std::uint64_t seed) {
  std::vector<std::string> sorted = contest_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("duplicate contest id in schedule for " + key.str());

  rng::Stream stream(
      rng::derive({seed, kScheduleSalt, rng::hash_str(key.str())}));
  stream.shuffle(sorted);

  // First half of the shuffle shows the stored orientation (AB), second
  // half the swap (BA); an odd leftover falls either way by a seeded hash
  // of its id, so across matchups leftovers split evenly.
  std::map<std::string, PresentationOrder> assigned;
  std::size_t half = sorted.size() / 2;
  for (std::size_t i = 0; i < half * 2; ++i)
    assigned[sorted[i]] =
        i < half ? PresentationOrder::AB : PresentationOrder::BA;
  if (sorted.size() % 2 == 1) {
    const std::string& leftover = sorted.back();
    std::uint64_t h =
        rng::derive({seed, kOddContestSalt, rng::hash_str(leftover)});
    assigned[leftover] =
        (h & 1) == 0 ? PresentationOrder::AB : PresentationOrder::BA;
  }

  OrderPlan plan;
  plan.reserve(contest_ids.size());
  for (const auto& id : contest_ids) plan.emplace_back(id, assigned[id]);
  return plan;
}

OrderPlan schedule_orders(const std::vector<ContestRecord>& contests,
                          std::uint64_t seed) {
  if (contests.empty())
    throw ValidationError("cannot schedule an empty contest set");
  MatchupKey key(contests.front().model_a, contests.front().model_b);
  std::vector<std::string> ids;
  ids.reserve(contests.size());
  for (const auto& c : contests) {
    if (MatchupKey(c.model_a, c.model_b) != key)
      throw ValidationError("schedule mixes matchups: " + key.str() +
                            " and " + MatchupKey(c.model_a, c.model_b).str());
    ids.push_back(c.contest_id);
  }
  return schedule_order_ids(key, ids, seed);
}

std::optional<ModelId> resolve_winner(const ContestRecord& contest,
                                      PresentationOrder order, Choice choice) {
  if (choice == Choice::Tie) return std::nullopt;
  bool first_won = choice == Choice::First;
  bool a_shown_first = order == PresentationOrder::AB;
  return first_won == a_shown_first ? contest.model_a : contest.model_b;
}

JudgeVerdict judge_contest(const ContestRecord& contest,
                           PresentationOrder order, const ModelId& judge_id,
                           Gateway& gateway, DiskCache* cache,
                           const JudgeOptions& options) {
  JudgeVerdict verdict;
  verdict.contest_id = contest.contest_id;
  verdict.judge_id = judge_id;
  verdict.order = order;

  auto fail = [&](const std::string& reason) {
    verdict.failed = true;
    verdict.failure_reason = reason;
    return verdict;
  };

  CompletionRequest reasoning_req;
  reasoning_req.judge_id = judge_id;
  reasoning_req.stage = Stage::Reasoning;
  reasoning_req.prompt = build_reasoning_prompt(contest, order);
  reasoning_req.max_tokens = options.max_tokens_reasoning;
  reasoning_req.temperature = options.temperature;

  try {
    CompletionResult reasoning =
        cache ? gateway.cached_complete(reasoning_req, *cache)
              : gateway.complete(reasoning_req);
    verdict.reasoning = reasoning.text;
  } catch (const TransportError& e) {
    return fail(std::string("transport: ") + e.what());
  } catch (const PermanentError& e) {
    if (e.auth()) throw;
    return fail(std::string("permanent: ") + e.what());
  }
  if (verdict.reasoning.empty()) return fail("empty reasoning reply");

  CompletionRequest pref_req;
  pref_req.judge_id = judge_id;
  pref_req.stage = Stage::Preference;
  pref_req.prompt = build_preference_prompt(verdict.reasoning);
  pref_req.max_tokens = options.max_tokens_preference;
  pref_req.temperature = options.temperature;

  const int total_attempts = 1 + std::max(0, options.parse_retries);
  std::string last_raw;
  for (int attempt = 1; attempt <= total_attempts; ++attempt) {
    CompletionResult reply;
    try {
      // The first attempt may be served from the cache; retries go to the
      // backend directly (a cached malformed reply would never heal) and a
      // parseable retry overwrites the cache entry below.
      if (cache && attempt == 1) {
        reply = gateway.cached_complete(pref_req, *cache);
      } else {
        reply = gateway.complete(pref_req);
      }
    } catch (const TransportError& e) {
      return fail(std::string("transport: ") + e.what());
    } catch (const PermanentError& e) {
      if (e.auth()) throw;
      return fail(std::string("permanent: ") + e.what());
    }
    try {
      Choice choice = parse_preference(reply.text, options.parse_mode);
      if (cache && attempt > 1) cache->store(pref_req, reply.text);
      verdict.choice = choice;
      verdict.winner = resolve_winner(contest, order, choice);
      return verdict;
    } catch (const PreferenceParseError& e) {
      last_raw = e.raw();
    }
  }
  return fail("preference parse failed after " +
              std::to_string(total_attempts) +
              " attempts; last reply: " + truncate_for_log(last_raw));
}

MatchupStats aggregate_matchup(const MatchupKey& key, const ModelId& judge_id,
                               const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty())
    throw ValidationError("no verdicts to aggregate for " + key.str());

  MatchupStats stats;
  stats.key = key;
  stats.judge_id = judge_id;
  for (const auto& v : verdicts) {
    if (v.failed)
      throw ValidationError("failed verdict passed to aggregation: " +
                            v.contest_id);
    if (v.judge_id != judge_id)
      throw ValidationError("aggregate mixes judges: " + judge_id + " and " +
                            v.judge_id);
    if (!v.choice)
      throw ValidationError("verdict without a choice: " + v.contest_id);
    ++stats.n;
    if (!v.winner) {
      ++stats.ties;
    } else if (*v.winner == key.model_lo) {
      ++stats.wins_lo;
    } else if (*v.winner != key.model_hi) {
      throw ValidationError("winner " + *v.winner + " is not part of " +
                            key.str());
    }
  }
  stats.p = (static_cast<double>(stats.wins_lo) + 0.5 * stats.ties) /
            static_cast<double>(stats.n);
  stats.variance = stats.p * (1.0 - stats.p);
  return stats;
}

std::string verdict_to_jsonl(const JudgeVerdict& verdict) {
  nlohmann::ordered_json j;
  j["contest_id"] = verdict.contest_id;
  j["judge_id"] = verdict.judge_id;
  j["order"] = to_string(verdict.order);
  j["choice"] = verdict.choice ? to_string(*verdict.choice) : "";
  if (verdict.failed)
    j["winner"] = "";
  else
    j["winner"] = verdict.winner ? *verdict.winner : "tie";
  j["reasoning"] = verdict.reasoning;
  j["failed"] = verdict.failed;
  j["failure_reason"] = verdict.failure_reason;
  return j.dump();
}

JudgeVerdict verdict_from_jsonl(const std::string& line) {
  nlohmann::json j;
  JudgeVerdict v;
  std::string winner;
  try {
    j = nlohmann::json::parse(line);
    v.contest_id = j.at("contest_id").get<std::string>();
    v.judge_id = j.at("judge_id").get<std::string>();
    v.order = order_from_string(j.at("order").get<std::string>());
    v.reasoning = j.value("reasoning", std::string());
    v.failed = j.at("failed").get<bool>();
    v.failure_reason = j.value("failure_reason", std::string());
    if (v.failed) return v;
    v.choice = choice_from_string(j.at("choice").get<std::string>());
    winner = j.at("winner").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("verdict line is malformed or missing fields");
  }
  if (*v.choice == Choice::Tie) {
    if (winner != "tie")
      throw ParseError("tie verdict with a winner: " + v.contest_id);
    v.winner = std::nullopt;
  } else {
    if (winner.empty() || winner == "tie")
      throw ParseError("non-tie verdict without a winner: " + v.contest_id);
    v.winner = winner;
  }
  return v;
}

void write_verdict_log(const std::filesystem::path& path,
                       const std::vector<JudgeVerdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    out += verdict_to_jsonl(v);
    out += '\n';
  }
  io::atomic_write_file(path, out);
}

std::vector<JudgeVerdict> load_verdict_log(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open verdict log: " + path.string());
  std::vector<JudgeVerdict> verdicts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = io::trim(line);
    if (body.empty()) continue;
    try {
      verdicts.push_back(verdict_from_jsonl(body));
    } catch (const Error& e) {
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
  return verdicts;
}

}  // namespace verdict
