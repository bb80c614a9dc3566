#include "verdict/contest_data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "verdict/io.hpp"

namespace verdict {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string require_string_field(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string())
    throw ParseError(std::string("missing or non-string field: ") + name);
  std::string value = it->get<std::string>();
  if (value.empty())
    throw ParseError(std::string("empty field: ") + name);
  return value;
}

ContestRecord record_from_json(const nlohmann::json& j) {
  ContestRecord r;
  r.contest_id = require_string_field(j, "contest_id");
  r.prompt = require_string_field(j, "prompt");
  r.model_a = require_string_field(j, "model_a");
  r.model_b = require_string_field(j, "model_b");
  r.response_a = require_string_field(j, "response_a");
  r.response_b = require_string_field(j, "response_b");
  if (r.model_a == r.model_b)
    throw ValidationError("contest pairs a model with itself: " + r.model_a);
  return r;
}

}  // namespace

DatasetScan scan_contests(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open contest manifest: " + path.string());

  DatasetScan scan;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = io::trim(line);
    if (body.empty()) continue;
    ++scan.lines;
    try {
      nlohmann::json j = nlohmann::json::parse(body);
      ContestRecord r = record_from_json(j);
      if (!seen_ids.insert(r.contest_id).second)
        throw ValidationError("duplicate contest id: " + r.contest_id);
      scan.records.push_back(std::move(r));
    } catch (const nlohmann::json::parse_error&) {
      std::ostringstream msg;
      msg << path.filename().string() << " line " << line_no
          << ": not valid JSON";
      scan.errors.push_back(msg.str());
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << path.filename().string() << " line " << line_no << ": "
          << e.what();
      scan.errors.push_back(msg.str());
    }
  }
  return scan;
}

std::vector<ContestRecord> load_contests(const std::filesystem::path& path) {
  DatasetScan scan = scan_contests(path);
  if (!scan.errors.empty()) throw ParseError(scan.errors.front());
  return scan.records;
}

EloTable load_elo_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open elo table: " + path.string());

  EloTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = io::trim(line);
    if (body.empty()) continue;
    auto fields = io::split_csv_line(body);
    if (!header_seen) {
      if (fields.size() != 2 || io::trim(fields[0]) != "model" ||
          io::trim(fields[1]) != "elo")
        throw ParseError(path.filename().string() +
                         ": expected header \"model,elo\"");
      header_seen = true;
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) + ": expected 2 fields");
    std::string model = io::trim(fields[0]);
    std::string elo_text = io::trim(fields[1]);
    try {
      std::size_t used = 0;
      double elo = std::stod(elo_text, &used);
      if (used != elo_text.size()) throw std::invalid_argument(elo_text);
      if (!table.entries.emplace(model, elo).second)
        throw ValidationError(path.filename().string() +
                              ": duplicate model: " + model);
    } catch (const std::invalid_argument&) {
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) +
                       ": not a number: " + elo_text);
    }
  }
  if (!header_seen)
    throw ParseError(path.filename().string() + ": empty elo table");
  return table;
}

std::vector<MatchupGapRow> load_matchup_gaps(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matchup table: " + path.string());

  std::vector<MatchupGapRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = io::trim(line);
    if (body.empty()) continue;
    auto fields = io::split_csv_line(body);
    if (!header_seen) {
      if (fields.size() != 3 || io::trim(fields[0]) != "model_a" ||
          io::trim(fields[1]) != "model_b" || io::trim(fields[2]) != "gap")
        throw ParseError(path.filename().string() +
                         ": expected header \"model_a,model_b,gap\"");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) + ": expected 3 fields");
    MatchupGapRow row;
    row.model_a = io::trim(fields[0]);
    row.model_b = io::trim(fields[1]);
    std::string gap_text = io::trim(fields[2]);
    try {
      std::size_t used = 0;
      row.gap = std::stod(gap_text, &used);
      if (used != gap_text.size()) throw std::invalid_argument(gap_text);
    } catch (const std::invalid_argument&) {
      throw ParseError(path.filename().string() + " line " +
                       std::to_string(line_no) +
                       ": not a number: " + gap_text);
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen)
    throw ParseError(path.filename().string() + ": empty matchup table");
  return rows;
}

MatchupMap group_matchups(const std::vector<ContestRecord>& records) {
  MatchupMap map;
  for (const auto& r : records)
    map[MatchupKey(r.model_a, r.model_b)].push_back(r);
  return map;
}

MatchupMap filter_matchups(const MatchupMap& matchups,
                           std::size_t min_contests) {
  MatchupMap kept;
  for (const auto& [key, records] : matchups)
    if (records.size() >= min_contests) kept.emplace(key, records);
  return kept;
}

std::vector<MatchupKey> sort_keys_by_elo_gap(std::vector<MatchupKey> keys,
                                             const EloTable& elos) {
  for (const auto& key : keys) {
    elos.at(key.model_lo);
    elos.at(key.model_hi);
  }
  std::stable_sort(keys.begin(), keys.end(),
                   [&](const MatchupKey& a, const MatchupKey& b) {
                     double ga = elos.gap(a);
                     double gb = elos.gap(b);
                     if (ga != gb) return ga > gb;
                     return a < b;
                   });
  return keys;
}

std::vector<MatchupKey> select_matchups_by_elo_gap(const MatchupMap& matchups,
                                                   const EloTable& elos,
                                                   std::size_t k) {
  std::vector<MatchupKey> keys;
  keys.reserve(matchups.size());
  for (const auto& [key, records] : matchups) keys.push_back(key);
  keys = sort_keys_by_elo_gap(std::move(keys), elos);
  if (keys.size() > k) keys.resize(k);
  return keys;
}

std::string contest_to_jsonl(const ContestRecord& record) {
  ordered_json j;
  j["contest_id"] = record.contest_id;
  j["prompt"] = record.prompt;
  j["model_a"] = record.model_a;
  j["model_b"] = record.model_b;
  j["response_a"] = record.response_a;
  j["response_b"] = record.response_b;
  return j.dump();
}

void write_contests(const std::filesystem::path& path,
                    const std::vector<ContestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += contest_to_jsonl(r);
    out += '\n';
  }
  io::atomic_write_file(path, out);
}

}  // namespace verdict
