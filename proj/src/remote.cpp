#include "abductir/remote.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "abductir/errors.hpp"
#include "httplib.h"

namespace abductir {

std::string resolve_scorer_url(const std::string& configured) {
  const char* env = std::getenv(kScorerUrlEnv);
  if (env != nullptr && *env != '\0') return env;
  return configured;
}

BridgeClient::BridgeClient(RemoteConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConfigError("scorer url must start with http:// (got '" + url + "')");
  }
  auto slash = url.find('/', scheme.size());
  host_ = url.substr(0, slash);
  if (host_.size() == scheme.size()) throw ConfigError("scorer url has no host: " + url);
  base_path_ = slash == std::string::npos ? "" : url.substr(slash);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (config_.max_batch == 0) throw ConfigError("scorer max_batch must be >= 1");
}

std::vector<double> BridgeClient::post_batch(const std::string& task, nlohmann::json items,
                                             std::size_t expected, double lo, double hi) const {
  nlohmann::json body = {{"task", task}, {"pairs", std::move(items)}, {"model_id", config_.model_id}};
  const std::string payload = body.dump();

  httplib::Client cli(host_);
  auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);

  for (int attempt = 0;; ++attempt) {
    auto res = cli.Post(base_path_ + "/score", payload, "application/json");
    if (!res) {
      throw ScorerError("scorer request to " + host_ + base_path_ + "/score failed: " +
                        httplib::to_string(res.error()));
    }
    if (res->status == 503 && attempt < config_.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms * (attempt + 1)));
      continue;
    }
    if (res->status != 200) {
      throw ScorerError("scorer returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(std::string("scorer returned malformed JSON: ") + e.what());
    }
    if (!reply.contains("scores") || !reply["scores"].is_array()) {
      throw ScorerError("scorer reply has no 'scores' array");
    }
    const auto& scores = reply["scores"];
    if (scores.size() != expected) {
      throw ScorerError("scorer returned " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(expected) + " items");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& s : scores) {
      if (!s.is_number()) throw ScorerError("scorer reply contains a non-numeric score");
      double v = s.get<double>();
      if (!std::isfinite(v) || v < lo - 1e-9 || v > hi + 1e-9) {
        throw ScorerError("scorer returned out-of-range " + task + " score " + std::to_string(v));
      }
      out.push_back(v);
    }
    return out;
  }
}

std::vector<double> BridgeClient::score_similarity(std::span<const TextPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t start = 0; start < pairs.size(); start += config_.max_batch) {
    auto n = std::min(config_.max_batch, pairs.size() - start);
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = start; i < start + n; ++i) items.push_back({pairs[i].first, pairs[i].second});
    auto part = post_batch("similarity", std::move(items), n, 0.0, 5.0);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<double> BridgeClient::score_answers(std::span<const AnswerTriple> triples) const {
  std::vector<double> out;
  out.reserve(triples.size());
  for (std::size_t start = 0; start < triples.size(); start += config_.max_batch) {
    auto n = std::min(config_.max_batch, triples.size() - start);
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = start; i < start + n; ++i) {
      items.push_back({triples[i].passage, triples[i].question, triples[i].option});
    }
    auto part = post_batch("answer", std::move(items), n, 0.0, 1.0);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

nlohmann::json BridgeClient::health() const {
  httplib::Client cli(host_);
  cli.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
  cli.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
  auto res = cli.Get(base_path_ + "/healthz");
  if (!res) throw ScorerError("health check failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ScorerError("health check returned HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("health check returned malformed JSON: ") + e.what());
  }
}

}  // namespace abductir
