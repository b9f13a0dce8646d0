#include <cstdlib>
#include <string>
#include <vector>

#include "abductir/errors.hpp"
#include "abductir/pipeline.hpp"
#include "abductir/remote.hpp"
#include "abductir/scorers.hpp"
#include "doctest.h"
#include "support/fake_bridge.hpp"
#include "support/oracles.hpp"

using namespace abductir;

namespace {

RemoteConfig config_for(const fake::Bridge& b, std::size_t max_batch = 64) {
  RemoteConfig rc;
  rc.url = b.url();
  rc.model_id = "test-model";
  rc.max_batch = max_batch;
  rc.timeout_ms = 5000;
  rc.retry_backoff_ms = 1;
  return rc;
}

std::vector<TextPair> pairs(std::size_t n) {
  std::vector<TextPair> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(std::string(i % 13, 'a'), "sentence " + std::to_string(i));
  return out;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) {
      setenv(kScorerUrlEnv, value, 1);
    } else {
      unsetenv(kScorerUrlEnv);
    }
  }
  ~EnvGuard() { unsetenv(kScorerUrlEnv); }
};

}  // namespace

TEST_CASE("similarity batches keep order and count") {
  fake::Bridge bridge;
  for (std::size_t n : {1u, 7u, 64u, 150u}) {
    BridgeClient client(config_for(bridge, 64));
    auto in = pairs(n);
    auto scores = client.score_similarity(in);
    REQUIRE(scores.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(scores[i] == fake::similarity_score(in[i].first, in[i].second));
  }
  CHECK(bridge.batch_sizes() == std::vector<std::size_t>{1, 7, 64, 64, 64, 22});

  BridgeClient small(config_for(bridge, 5));
  CHECK(small.score_similarity(std::vector<TextPair>{}).empty());
  CHECK(small.score_similarity(pairs(12)).size() == 12);
}

TEST_CASE("answer triples") {
  fake::Bridge bridge;
  BridgeClient client(config_for(bridge, 3));
  std::vector<AnswerTriple> t = {{"p one", "q", "a"}, {"p", "question two", "bb"}, {"", "", ""}, {"x", "y", "z"}};
  auto scores = client.score_answers(t);
  REQUIRE(scores.size() == 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(scores[i] == fake::answer_score(t[i].passage, t[i].question, t[i].option));
  }
  CHECK(bridge.batch_sizes() == std::vector<std::size_t>{3, 1});
}

TEST_CASE("503 is retried, other failures surface as scorer errors") {
  fake::Bridge bridge;
  int unavailable = 2;
  bridge.set_hook([&](const fake::json&, httplib::Response& res) {
    if (unavailable-- > 0) {
      res.status = 503;
      res.set_content("warming up", "text/plain");
      return true;
    }
    return false;
  });
  BridgeClient client(config_for(bridge));
  CHECK(client.score_similarity(pairs(3)).size() == 3);
  CHECK(bridge.requests() == 3);

  auto rc = config_for(bridge);
  rc.max_retries = 1;
  unavailable = 5;
  CHECK_THROWS_AS(BridgeClient(rc).score_similarity(pairs(1)), ScorerError);

  bridge.set_hook([](const fake::json&, httplib::Response& res) {
    res.status = 413;
    res.set_content("batch too large", "text/plain");
    return true;
  });
  CHECK_THROWS_WITH_AS(client.score_similarity(pairs(2)), doctest::Contains("413"), ScorerError);

  bridge.set_hook([](const fake::json&, httplib::Response& res) {
    res.set_content(R"({"scores": [1.0]})", "application/json");
    return true;
  });
  CHECK_THROWS_WITH_AS(client.score_similarity(pairs(2)), doctest::Contains("1 scores for 2"), ScorerError);

  bridge.set_hook([](const fake::json&, httplib::Response& res) {
    res.set_content(R"({"scores": [7.5]})", "application/json");
    return true;
  });
  CHECK_THROWS_WITH_AS(client.score_similarity(pairs(1)), doctest::Contains("out-of-range"), ScorerError);
  CHECK_THROWS_AS(client.score_answers(std::vector<AnswerTriple>{{"p", "q", "o"}}), ScorerError);

  bridge.set_hook([](const fake::json&, httplib::Response& res) {
    res.set_content("not json", "application/json");
    return true;
  });
  CHECK_THROWS_AS(client.score_similarity(pairs(1)), ScorerError);
}

TEST_CASE("health check and URL handling") {
  fake::Bridge bridge;
  BridgeClient client(config_for(bridge));
  auto h = client.health();
  CHECK(h["status"] == "ok");

  auto rc = config_for(bridge);
  rc.url = bridge.url("/v1/");
  BridgeClient prefixed(rc);
  CHECK(prefixed.score_similarity(pairs(2)).size() == 2);

  rc.url = "https://example.org";
  CHECK_THROWS_AS(BridgeClient{rc}, ConfigError);
  rc.url = "http://";
  CHECK_THROWS_AS(BridgeClient{rc}, ConfigError);
  rc.url = bridge.url();
  rc.max_batch = 0;
  CHECK_THROWS_AS(BridgeClient{rc}, ConfigError);

  rc = config_for(bridge);
  rc.url = "http://127.0.0.1:1";
  rc.timeout_ms = 200;
  CHECK_THROWS_AS(BridgeClient(rc).score_similarity(pairs(1)), ScorerError);
  CHECK_THROWS_AS(BridgeClient(rc).health(), ScorerError);
}

TEST_CASE("environment variable overrides the configured URL") {
  {
    EnvGuard env("http://from-env:9000");
    CHECK(resolve_scorer_url("http://configured:1") == "http://from-env:9000");
  }
  {
    EnvGuard env("");
    CHECK(resolve_scorer_url("http://configured:1") == "http://configured:1");
  }
  {
    EnvGuard env(nullptr);
    CHECK(resolve_scorer_url("") == "");
  }
}

TEST_CASE("remote scorers plug into the pipeline") {
  fake::Bridge bridge;
  oracle::TempDir tmp("remote");
  PipelineConfig c;
  c.questions = std::string(ABDUCTIR_TEST_DATA) + "/e2e/questions.jsonl";
  c.facts = std::string(ABDUCTIR_TEST_DATA) + "/e2e/openbook.txt";
  c.knowledge = std::string(ABDUCTIR_TEST_DATA) + "/e2e/knowledge.txt";
  c.out_dir = tmp.str("a");
  c.answer_scorer = "remote";
  c.sim_scorer = "remote";
  c.scorer_url = "http://127.0.0.1:1";
  c.max_batch = 16;
  c.parallelism = 4;
  {
    EnvGuard env(bridge.url().c_str());
    auto first = run_pipeline(c);
    CHECK(first.predictions.size() == 20);
    for (auto n : bridge.batch_sizes()) CHECK(n <= 16);
    c.out_dir = tmp.str("b");
    run_pipeline(c);
    CHECK(oracle::slurp(tmp.str("a") + "/predictions.jsonl") == oracle::slurp(tmp.str("b") + "/predictions.jsonl"));
  }

  // Without the override the configured (dead) URL is used.
  c.out_dir = tmp.str("c");
  c.timeout_ms = 200;
  try {
    run_pipeline(c);
    FAIL("expected a scorer failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::scorer);
  }

  RemoteSimilarityScorer sts(BridgeClient(config_for(bridge)));
  CHECK(sts.range() == ScoreRange{0.0, 5.0});
  CHECK(sts.name() == "remote:test-model");
  std::vector<std::string> cands = {"a", "bb"};
  CHECK(sts.score("q", cands) == std::vector<double>{fake::similarity_score("q", "a"), fake::similarity_score("q", "bb")});
}
