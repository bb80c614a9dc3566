#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "verdict/rng.hpp"
#include "verdict/types.hpp"

namespace verdict {

enum class Stage { Reasoning, Preference };

std::string to_string(Stage stage);

// One completion request. Identity for caching is the full tuple below —
// two requests agree iff every field agrees.
struct CompletionRequest {
  ModelId judge_id;
  Stage stage = Stage::Reasoning;
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.0;
};

struct CompletionResult {
  std::string text;
  bool cached = false;
  int attempts = 0;  // backend attempts made (0 on a cache hit)
  std::chrono::milliseconds latency{0};
};

// A raw completion source. One call, no retries; classification is the
// backend's job: throw TransientError for retryable failures (connect
// error, timeout, 408/429/5xx) and PermanentError otherwise.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct GatewayConfig {
  int retry_budget = 3;  // retries after the first attempt
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_multiplier = 2.0;
  double jitter = 0.2;  // +/-20% multiplicative jitter on each backoff
  int max_in_flight = 8;
  std::chrono::milliseconds min_request_interval{0};  // 0 = no rate limit
  std::uint64_t seed = 0;                             // jitter randomness
  // Injectable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleeper;
};

// Content-addressed completion cache: one file per request digest, written
// via temp-file + rename so interrupted runs never leave torn entries.
// Unreadable or corrupt entries degrade to misses.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir);

  static std::string key_of(const CompletionRequest& request);

  std::optional<std::string> lookup(const CompletionRequest& request) const;
  void store(const CompletionRequest& request, const std::string& text);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
};

// Wraps a backend with bounded concurrency, optional request-rate spacing,
// exponential backoff with seeded jitter, and an optional disk cache.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayConfig config);

  // Retrying call. Throws TransportError once the budget is exhausted
  // (attempts() = retry_budget + 1) or PermanentError immediately.
  CompletionResult complete(const CompletionRequest& request);

  // Cache-through variant: hit -> cached result (no backend call),
  // miss -> complete() then store.
  CompletionResult cached_complete(const CompletionRequest& request,
                                   DiskCache& cache);

  const GatewayConfig& config() const { return config_; }

 private:
  void acquire_slot();
  void release_slot();
  void pace();
  std::chrono::milliseconds jittered(std::chrono::milliseconds base);

  std::shared_ptr<Backend> backend_;
  GatewayConfig config_;

  std::mutex mu_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;
  std::chrono::steady_clock::time_point last_dispatch_{};
  rng::Stream jitter_rng_;
};

// Chat-completions HTTP backend. Reads the API key from the named
// environment variable at construction; the key is sent only as the
// Authorization header and never logged or echoed into errors.
struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "VERDICT_API_KEY";
  // Optional judge id -> provider model name remapping.
  std::map<ModelId, std::string> model_names;
  std::chrono::milliseconds timeout{120000};
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string complete(const CompletionRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string api_key_;
  std::string host_;
  int port_ = 0;
  bool tls_ = false;
};

// Offline backend that answers both elicitation stages from the simulation
// module's synthetic-judge model. Stage Reasoning samples a preference for
// the two answers named by [model:<id>] tags in the prompt and emits a
// canned paragraph encoding it; stage Preference extracts that preference
// from the embedded passage. `garble_rate` replaces the stage-2 integer
// with a verbose sentence (strict parsing fails, lenient succeeds) on a
// seeded fraction of replies.
class MockBackend : public Backend {
 public:
  MockBackend(std::map<ModelId, SyntheticJudge> judges, EloTable model_elos,
              std::uint64_t seed, double garble_rate = 0.0);
  // Single-judge convenience roster.
  MockBackend(const SyntheticJudge& judge, EloTable model_elos,
              std::uint64_t seed, double garble_rate = 0.0);

  std::string complete(const CompletionRequest& request) override;

 private:
  std::map<ModelId, SyntheticJudge> judges_;
  EloTable model_elos_;
  std::uint64_t seed_ = 0;
  double garble_rate_ = 0.0;
};

}  // namespace verdict
