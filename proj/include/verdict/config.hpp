#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "verdict/gateway.hpp"
#include "verdict/judging.hpp"
#include "verdict/prompts.hpp"
#include "verdict/types.hpp"

namespace verdict {

// Everything a command run needs, assembled from a JSON config file plus
// command-line overrides (flags win). The seed is always explicit: there is
// no wall-clock fallback, so two runs with the same config and cache state
// produce identical bytes.
struct RunConfig {
  std::optional<std::uint64_t> seed;

  // Inputs.
  std::filesystem::path contests;      // contest manifest (JSONL)
  std::filesystem::path judge_elos;    // judge ratings (CSV)
  std::filesystem::path model_elos;    // matchee ratings (CSV)
  std::filesystem::path world;         // synthetic world (JSON)
  std::filesystem::path consistency;   // precomputed judge,elo,consistency CSV
  std::filesystem::path verdicts;      // verdict log (JSONL), input to score
  std::vector<ModelId> judges;         // roster for judging runs

  // Knobs.
  std::size_t min_contests = 20;
  std::size_t permutations = 25;
  std::string strategy = "both";  // random | sorted | both
  ParseMode parse_mode = ParseMode::Strict;
  std::string backend = "mock";  // mock | http
  double garble_rate = 0.0;      // mock backend stage-2 noise
  std::size_t cluster_k = 3;
  std::size_t cluster_restarts = 100;
  JudgeOptions judge_options;

  // Gateway.
  GatewayConfig gateway;
  HttpBackendConfig http;
  std::filesystem::path cache_dir;  // empty = no completion cache

  // Outputs.
  std::filesystem::path out = "out";

  // Optional result gate: correlation below this exits with code 5.
  std::optional<double> min_pearson_r;

  std::uint64_t require_seed() const;
};

// Loads a JSON config. Unknown keys are rejected (ConfigError) so typos
// fail loudly instead of silently running defaults.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace verdict
