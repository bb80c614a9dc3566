#include "verdict/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "verdict/io.hpp"

namespace verdict {

std::uint64_t RunConfig::require_seed() const {
  if (!seed)
    throw ConfigError(
        "no seed given; set \"seed\" in the config or pass --seed (there is "
        "no wall-clock default)");
  return *seed;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         const std::set<std::string>& known,
                         const std::string& scope) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k))
      throw ConfigError("unknown config key: " + scope + k);
}

template <class T>
T number_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(std::string("config key is not a number: ") + key);
  return j[key].get<T>();
}

std::string string_or(const nlohmann::json& j, const char* key,
                      const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw ConfigError(std::string("config key is not a string: ") + key);
  return j[key].get<std::string>();
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const ParseError&) {
    throw ConfigError("cannot open config: " + path.string());
  } catch (const nlohmann::json::parse_error&) {
    throw ConfigError("config is not valid JSON: " + path.string());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  static const std::set<std::string> known{
      "seed",        "contests",    "judge_elos",       "model_elos",
      "world",       "consistency", "verdicts",         "judges",
      "min_contests", "permutations", "strategy",       "parse_mode",
      "backend",     "garble_rate", "cluster_k",        "cluster_restarts",
      "out",         "cache_dir",   "min_pearson_r",    "judging",
      "gateway",     "http"};
  reject_unknown_keys(j, known, "");

  RunConfig config;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw ConfigError("seed must be a non-negative integer");
    config.seed = j["seed"].get<std::uint64_t>();
  }
  config.contests = string_or(j, "contests", "");
  config.judge_elos = string_or(j, "judge_elos", "");
  config.model_elos = string_or(j, "model_elos", "");
  config.world = string_or(j, "world", "");
  config.consistency = string_or(j, "consistency", "");
  config.verdicts = string_or(j, "verdicts", "");
  if (j.contains("judges")) {
    if (!j["judges"].is_array())
      throw ConfigError("judges must be an array of ids");
    for (const auto& id : j["judges"]) {
      if (!id.is_string())
        throw ConfigError("judges must be an array of ids");
      config.judges.push_back(id.get<std::string>());
    }
  }
  config.min_contests = number_or<std::size_t>(j, "min_contests", 20);
  config.permutations = number_or<std::size_t>(j, "permutations", 25);
  config.strategy = string_or(j, "strategy", "both");
  if (config.strategy != "random" && config.strategy != "sorted" &&
      config.strategy != "both")
    throw ConfigError("strategy must be random, sorted, or both");
  config.parse_mode =
      parse_mode_from_string(string_or(j, "parse_mode", "strict"));
  config.backend = string_or(j, "backend", "mock");
  if (config.backend != "mock" && config.backend != "http")
    throw ConfigError("backend must be mock or http");
  config.garble_rate = number_or<double>(j, "garble_rate", 0.0);
  config.cluster_k = number_or<std::size_t>(j, "cluster_k", 3);
  config.cluster_restarts = number_or<std::size_t>(j, "cluster_restarts", 100);
  config.out = string_or(j, "out", "out");
  config.cache_dir = string_or(j, "cache_dir", "");
  if (j.contains("min_pearson_r"))
    config.min_pearson_r = number_or<double>(j, "min_pearson_r", 0.0);

  if (j.contains("judging")) {
    const auto& jj = j["judging"];
    reject_unknown_keys(jj,
                        {"parse_retries", "max_tokens_reasoning",
                         "max_tokens_preference", "temperature"},
                        "judging.");
    config.judge_options.parse_retries =
        number_or<int>(jj, "parse_retries", 2);
    config.judge_options.max_tokens_reasoning =
        number_or<int>(jj, "max_tokens_reasoning", 1024);
    config.judge_options.max_tokens_preference =
        number_or<int>(jj, "max_tokens_preference", 8);
    config.judge_options.temperature = number_or<double>(jj, "temperature", 0.0);
  }

  if (j.contains("gateway")) {
    const auto& gj = j["gateway"];
    reject_unknown_keys(gj,
                        {"retry_budget", "initial_backoff_ms",
                         "backoff_multiplier", "jitter", "max_in_flight",
                         "min_request_interval_ms"},
                        "gateway.");
    config.gateway.retry_budget = number_or<int>(gj, "retry_budget", 3);
    config.gateway.initial_backoff = std::chrono::milliseconds(
        number_or<long long>(gj, "initial_backoff_ms", 1000));
    config.gateway.backoff_multiplier =
        number_or<double>(gj, "backoff_multiplier", 2.0);
    config.gateway.jitter = number_or<double>(gj, "jitter", 0.2);
    config.gateway.max_in_flight = number_or<int>(gj, "max_in_flight", 8);
    config.gateway.min_request_interval = std::chrono::milliseconds(
        number_or<long long>(gj, "min_request_interval_ms", 0));
  }

  if (j.contains("http")) {
    const auto& hj = j["http"];
    reject_unknown_keys(
        hj, {"base_url", "path", "api_key_env", "timeout_ms", "model_names"},
        "http.");
    config.http.base_url =
        string_or(hj, "base_url", config.http.base_url);
    config.http.path = string_or(hj, "path", config.http.path);
    config.http.api_key_env =
        string_or(hj, "api_key_env", config.http.api_key_env);
    config.http.timeout =
        std::chrono::milliseconds(number_or<long long>(hj, "timeout_ms",
                                                       120000));
    if (hj.contains("model_names")) {
      if (!hj["model_names"].is_object())
        throw ConfigError("http.model_names must be an object");
      for (const auto& [judge, name] : hj["model_names"].items())
        config.http.model_names[judge] = name.get<std::string>();
    }
  }

  return config;
}

}  // namespace verdict
