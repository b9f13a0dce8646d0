#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace abductir {

inline constexpr const char* kScorerUrlEnv = "ABDUCT_IR_SCORER_URL";

/// Returns $ABDUCT_IR_SCORER_URL when set and nonempty, else `configured`.
std::string resolve_scorer_url(const std::string& configured);

struct RemoteConfig {
  std::string url;  // e.g. "http://127.0.0.1:8080" or "http://host:port/prefix"
  std::string model_id;
  std::size_t max_batch = 64;
  int timeout_ms = 30000;
  /// Attempts after a 503 (model warming up) before giving up.
  int max_retries = 5;
  int retry_backoff_ms = 200;
};

using TextPair = std::pair<std::string, std::string>;

struct AnswerTriple {
  std::string passage;
  std::string question;
  std::string option;
};

/// Client for the scoring service:
///   POST {url}/score  {"task": "similarity"|"answer", "pairs": [...], "model_id": ...}
///   -> {"scores": [...], "model_id": ..., "latency_ms": ...}
/// Requests larger than max_batch are split; scores come back in request
/// order. All failures surface as ScorerError.
class BridgeClient {
 public:
  explicit BridgeClient(RemoteConfig config);

  /// Scores in [0, 5].
  std::vector<double> score_similarity(std::span<const TextPair> pairs) const;
  /// Scores in [0, 1].
  std::vector<double> score_answers(std::span<const AnswerTriple> triples) const;
  /// GET {url}/healthz
  nlohmann::json health() const;

  const RemoteConfig& config() const noexcept { return config_; }

 private:
  std::vector<double> post_batch(const std::string& task, nlohmann::json items, std::size_t expected,
                                 double lo, double hi) const;

  RemoteConfig config_;
  std::string host_;  // scheme://host:port
  std::string base_path_;
};

}  // namespace abductir
