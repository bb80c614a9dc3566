#include "verdict/gateway.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "verdict/io.hpp"
#include "verdict/simulation.hpp"

namespace verdict {

std::string to_string(Stage stage) {
  return stage == Stage::Reasoning ? "reasoning" : "preference";
}

// ---------------------------------------------------------------------------
// DiskCache

namespace {

// 128-bit content digest from two independently seeded FNV/splitmix chains;
// the stored entry also embeds the full request, so even a digest collision
// cannot serve a wrong completion.
std::string request_digest(const CompletionRequest& r) {
  std::string material = r.judge_id;
  material += '\x1f';
  material += to_string(r.stage);
  material += '\x1f';
  material += std::to_string(r.max_tokens);
  material += '\x1f';
  material += io::fmt_double(r.temperature);
  material += '\x1f';
  material += r.prompt;

  std::uint64_t h1 = rng::hash_str(material);
  std::uint64_t s = h1 ^ 0x5bd1e995badc0ffeULL;
  std::uint64_t h2 = rng::splitmix64(s) ^ rng::hash_str(to_string(r.stage));
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

bool request_matches(const nlohmann::json& j, const CompletionRequest& r) {
  return j.value("judge_id", std::string()) == r.judge_id &&
         j.value("stage", std::string()) == to_string(r.stage) &&
         j.value("max_tokens", -1) == r.max_tokens &&
         j.value("temperature", std::string()) ==
             io::fmt_double(r.temperature) &&
         j.value("prompt", std::string()) == r.prompt;
}

}  // namespace

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string DiskCache::key_of(const CompletionRequest& request) {
  return request_digest(request);
}

std::filesystem::path DiskCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<std::string> DiskCache::lookup(
    const CompletionRequest& request) const {
  std::filesystem::path path = path_for(key_of(request));
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(io::read_file(path));
    if (!request_matches(j, request)) return std::nullopt;
    if (!j.contains("text") || !j["text"].is_string()) return std::nullopt;
    return j["text"].get<std::string>();
  } catch (...) {
    // Corrupt or unreadable entries degrade to misses.
    return std::nullopt;
  }
}

void DiskCache::store(const CompletionRequest& request,
                      const std::string& text) {
  nlohmann::ordered_json j;
  j["judge_id"] = request.judge_id;
  j["stage"] = to_string(request.stage);
  j["max_tokens"] = request.max_tokens;
  j["temperature"] = io::fmt_double(request.temperature);
  j["prompt"] = request.prompt;
  j["text"] = text;
  io::atomic_write_file(path_for(key_of(request)), j.dump());
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayConfig config)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      jitter_rng_(rng::derive({config_.seed, 0x6a697474ULL})) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (config_.retry_budget < 0)
    throw ConfigError("retry budget cannot be negative");
  if (config_.max_in_flight < 1)
    throw ConfigError("max in-flight requests must be at least 1");
  if (config_.jitter < 0.0 || config_.jitter >= 1.0)
    throw ConfigError("jitter must be in [0, 1)");
  if (!config_.sleeper)
    config_.sleeper = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
}

void Gateway::acquire_slot() {
  std::unique_lock<std::mutex> lock(mu_);
  slot_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
  ++in_flight_;
}

void Gateway::release_slot() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  slot_cv_.notify_one();
}

void Gateway::pace() {
  if (config_.min_request_interval.count() <= 0) return;
  std::chrono::milliseconds wait{0};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto now = std::chrono::steady_clock::now();
    auto earliest = last_dispatch_ + config_.min_request_interval;
    if (last_dispatch_.time_since_epoch().count() != 0 && earliest > now) {
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(earliest -
                                                                   now);
      last_dispatch_ = earliest;
    } else {
      last_dispatch_ = now;
    }
  }
  if (wait.count() > 0) config_.sleeper(wait);
}

std::chrono::milliseconds Gateway::jittered(std::chrono::milliseconds base) {
  double u;
  {
    std::lock_guard<std::mutex> lock(mu_);
    u = jitter_rng_.next_unit();
  }
  double factor = 1.0 + config_.jitter * (2.0 * u - 1.0);
  auto ms = static_cast<long long>(static_cast<double>(base.count()) * factor);
  return std::chrono::milliseconds(ms < 0 ? 0 : ms);
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw ValidationError("empty prompt");

  struct SlotGuard {
    Gateway* g;
    ~SlotGuard() { g->release_slot(); }
  };
  acquire_slot();
  SlotGuard guard{this};

  auto started = std::chrono::steady_clock::now();
  const int max_attempts = config_.retry_budget + 1;
  std::chrono::milliseconds backoff = config_.initial_backoff;
  std::string last_cause;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    pace();
    try {
      std::string text = backend_->complete(request);
      CompletionResult result;
      result.text = std::move(text);
      result.cached = false;
      result.attempts = attempt;
      result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      return result;
    } catch (const TransientError& e) {
      last_cause = e.what();
      if (attempt == max_attempts) break;
      config_.sleeper(jittered(backoff));
      backoff = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(backoff.count()) * config_.backoff_multiplier));
    } catch (const PermanentError& e) {
      throw PermanentError(e.what(), attempt, e.auth());
    }
  }
  throw TransportError("retry budget exhausted after " +
                           std::to_string(max_attempts) +
                           " attempts; last cause: " + last_cause,
                       max_attempts);
}

CompletionResult Gateway::cached_complete(const CompletionRequest& request,
                                          DiskCache& cache) {
  if (auto hit = cache.lookup(request)) {
    CompletionResult result;
    result.text = std::move(*hit);
    result.cached = true;
    result.attempts = 0;
    return result;
  }
  CompletionResult result = complete(request);
  cache.store(request, result.text);
  return result;
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  std::string url = config_.base_url;
  if (url.rfind("https://", 0) == 0)
    throw ConfigError(
        "https endpoints are not supported by this build; use http");
  if (url.rfind("http://", 0) != 0)
    throw ConfigError("base_url must start with http://");
  std::string rest = url.substr(7);
  auto slash = rest.find('/');
  if (slash != std::string::npos) rest = rest.substr(0, slash);
  auto colon = rest.find(':');
  if (colon == std::string::npos) {
    host_ = rest;
    port_ = 80;
  } else {
    host_ = rest.substr(0, colon);
    port_ = std::stoi(rest.substr(colon + 1));
  }
  if (host_.empty()) throw ConfigError("base_url has no host");

  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw ConfigError("api key environment variable is not set: " +
                        config_.api_key_env);
    api_key_ = key;
  }
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  nlohmann::ordered_json body;
  auto it = config_.model_names.find(request.judge_id);
  body["model"] =
      it != config_.model_names.end() ? it->second : request.judge_id;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;

  httplib::Client client(host_, port_);
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(
      config_.timeout);
  client.set_connection_timeout(seconds.count(), 0);
  client.set_read_timeout(seconds.count(), 0);
  client.set_write_timeout(seconds.count(), 0);

  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(config_.path.c_str(), headers, body.dump(),
                         "application/json");
  if (!res)
    throw TransientError("connection failure: " +
                         httplib::to_string(res.error()));

  int status = res->status;
  if (status == 200) {
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw PermanentError("malformed completion response body", 1);
    }
  }
  if (status == 408 || status == 429 || status >= 500)
    throw TransientError("http status " + std::to_string(status));
  if (status == 401 || status == 403)
    throw PermanentError("authentication rejected (http " +
                             std::to_string(status) + ")",
                         1, /*auth=*/true);
  throw PermanentError("http status " + std::to_string(status), 1);
}

// ---------------------------------------------------------------------------
// MockBackend

namespace {

constexpr std::uint64_t kStagePickSalt = 0x7069636bULL;
constexpr std::uint64_t kGarbleSalt = 0x67617262ULL;

// Extracts the text between `open` and `close`, exclusive.
std::string slice_between(const std::string& text, const std::string& open,
                          const std::string& close) {
  auto b = text.find(open);
  if (b == std::string::npos)
    throw PermanentError("mock backend: missing marker " + open, 1);
  b += open.size();
  auto e = text.find(close, b);
  if (e == std::string::npos)
    throw PermanentError("mock backend: missing marker " + close, 1);
  return text.substr(b, e - b);
}

ModelId model_tag_of(const std::string& answer) {
  const std::string open = "[model:";
  auto b = answer.find(open);
  if (b == std::string::npos)
    throw PermanentError("mock backend: answer carries no [model:...] tag", 1);
  b += open.size();
  auto e = answer.find(']', b);
  if (e == std::string::npos)
    throw PermanentError("mock backend: unterminated [model:...] tag", 1);
  return answer.substr(b, e - b);
}

const char* kPrefersFirst = "The author prefers Answer #1.";
const char* kPrefersSecond = "The author prefers Answer #2.";
const char* kNoPreference = "The author has no preference.";

}  // namespace

MockBackend::MockBackend(std::map<ModelId, SyntheticJudge> judges,
                         EloTable model_elos, std::uint64_t seed,
                         double garble_rate)
    : judges_(std::move(judges)),
      model_elos_(std::move(model_elos)),
      seed_(seed),
      garble_rate_(garble_rate) {
  if (garble_rate_ < 0.0 || garble_rate_ > 1.0)
    throw ConfigError("garble rate outside [0, 1]");
}

MockBackend::MockBackend(const SyntheticJudge& judge, EloTable model_elos,
                         std::uint64_t seed, double garble_rate)
    : MockBackend(std::map<ModelId, SyntheticJudge>{{judge.judge_id, judge}},
                  std::move(model_elos), seed, garble_rate) {}

std::string MockBackend::complete(const CompletionRequest& request) {
  if (request.stage == Stage::Reasoning) {
    auto it = judges_.find(request.judge_id);
    if (it == judges_.end())
      throw PermanentError("mock backend: unknown judge " + request.judge_id,
                           1);
    const SyntheticJudge& judge = it->second;

    std::string answer1 = slice_between(request.prompt,
                                        "[The start of Answer #1]\n",
                                        "\n[The end of Answer #1]");
    std::string answer2 = slice_between(request.prompt,
                                        "[The start of Answer #2]\n",
                                        "\n[The end of Answer #2]");
    ModelId model1 = model_tag_of(answer1);
    ModelId model2 = model_tag_of(answer2);

    PickProbability p = judge_pick_probability(judge, model_elos_.at(model1),
                                               model_elos_.at(model2));
    double u = rng::unit_at(rng::derive({seed_, rng::hash_str(request.judge_id),
                                         rng::hash_str(request.prompt),
                                         kStagePickSalt}));
    Choice choice = sample_pick(p, u);

    std::string verdict_sentence;
    std::string body;
    switch (choice) {
      case Choice::First:
        body = "Answer #1 follows the instructions more closely and holds up "
               "better on accuracy, depth, and detail, while Answer #2 is "
               "comparatively thin. ";
        verdict_sentence = kPrefersFirst;
        break;
      case Choice::Second:
        body = "Answer #2 follows the instructions more closely and holds up "
               "better on accuracy, depth, and detail, while Answer #1 is "
               "comparatively thin. ";
        verdict_sentence = kPrefersSecond;
        break;
      case Choice::Tie:
        body = "Both answers address the question to a comparable standard, "
               "and neither is decisively better on accuracy, depth, or "
               "detail. ";
        verdict_sentence = kNoPreference;
        break;
    }
    return body + verdict_sentence;
  }

  // Stage::Preference: recover the encoded preference from the passage.
  std::string passage = slice_between(request.prompt, "[Start of Passage]\n",
                                      "\n[End of Passage]");
  std::string digit;
  if (passage.find(kPrefersFirst) != std::string::npos)
    digit = "1";
  else if (passage.find(kPrefersSecond) != std::string::npos)
    digit = "2";
  else if (passage.find(kNoPreference) != std::string::npos)
    digit = "0";
  else
    throw PermanentError("mock backend: passage encodes no preference", 1);

  if (garble_rate_ > 0.0) {
    double u = rng::unit_at(rng::derive(
        {seed_, rng::hash_str(request.prompt), kGarbleSalt}));
    if (u < garble_rate_)
      return "After weighing the passage once more, the verdict is " + digit +
             ".";
  }
  return digit;
}

}  // namespace verdict
