#pragma once

// In-process stand-in for the scoring service. Scores are a deterministic
// function of the request items so tests can check order and batching.

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace fake {

using nlohmann::json;

/// Similarity: |a| + |b| lengths folded into [0, 5]. Answer: folded into [0, 1].
inline double similarity_score(const std::string& a, const std::string& b) {
  return double((a.size() * 7 + b.size() * 3) % 51) / 10.0;
}
inline double answer_score(const std::string& p, const std::string& q, const std::string& o) {
  return double((p.size() * 5 + q.size() + o.size() * 11) % 101) / 100.0;
}

class Bridge {
 public:
  /// Override hook: return true after filling `res` to replace the default
  /// handler for this request.
  using Hook = std::function<bool(const json& body, httplib::Response& res)>;

  Bridge() {
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok","models":["default"]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Bridge() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  std::string url(const std::string& prefix = "") const { return "http://127.0.0.1:" + std::to_string(port_) + prefix; }

  void set_hook(Hook h) {
    std::lock_guard lock(mu_);
    hook_ = std::move(h);
  }
  /// Sizes of the "pairs" arrays received so far, in arrival order.
  std::vector<std::size_t> batch_sizes() const {
    std::lock_guard lock(mu_);
    return batches_;
  }
  int requests() const { return requests_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    json body = json::parse(req.body);
    Hook hook;
    {
      std::lock_guard lock(mu_);
      batches_.push_back(body["pairs"].size());
      hook = hook_;
    }
    if (hook && hook(body, res)) return;
    json scores = json::array();
    for (const auto& item : body["pairs"]) {
      if (body["task"] == "similarity") {
        scores.push_back(similarity_score(item[0].get<std::string>(), item[1].get<std::string>()));
      } else {
        scores.push_back(
            answer_score(item[0].get<std::string>(), item[1].get<std::string>(), item[2].get<std::string>()));
      }
    }
    json out = {{"scores", scores}, {"model_id", body.value("model_id", "default")}, {"latency_ms", 0.1}};
    res.set_content(out.dump(), "application/json");
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  Hook hook_;
  std::vector<std::size_t> batches_;
  std::atomic<int> requests_{0};
};

}  // namespace fake
