#include <map>
#include <set>
#include <string>
#include <vector>

#include "abductir/errors.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/hypothesis.hpp"
#include "abductir/scorers.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace abductir;

namespace {

/// Score of candidate "f<i>" is (i % 5) + 0.5, so every fact falls in a
/// known bucket.
class BucketScorer final : public SimilarityScorer {
 public:
  std::string name() const override { return "bucket"; }
  ScoreRange range() const override { return {0.0, 5.0}; }
  std::vector<double> score(std::string_view, std::span<const std::string> candidates) const override {
    std::vector<double> out;
    for (const auto& c : candidates) out.push_back(double(std::stoi(c.substr(1)) % 5) + 0.5);
    return out;
  }
};

class BrokenScorer final : public SimilarityScorer {
 public:
  std::string name() const override { return "broken"; }
  ScoreRange range() const override { return {0.0, 1.0}; }
  std::vector<double> score(std::string_view, std::span<const std::string> candidates) const override {
    return std::vector<double>(candidates.size(), 1.5);
  }
};

Question question_with_gold(const std::string& id, const std::string& gold) {
  return oracle::make_question(id, 'B', gold);
}

}  // namespace

TEST_CASE("gecko hypothesis retrieves the hawk fact") {
  auto qs = load_questions(std::string(ABDUCTIR_TEST_DATA) + "/e2e/questions.jsonl");
  auto facts = load_facts(std::string(ABDUCTIR_TEST_DATA) + "/e2e/openbook.txt");
  TfidfCosineScorer scorer(facts.texts());
  auto h = generate_hypotheses(qs[0])[qs[0].answer_index()];
  auto top = retrieve_facts(h, scorer, facts, 10);
  REQUIRE(top.size() == 10);
  bool found = false;
  for (const auto& f : top) found = found || f.text == "hawks eat lizards";
  CHECK(found);
  for (std::size_t i = 1; i < top.size(); ++i) {
    CHECK((top[i - 1].rel > top[i].rel || (top[i - 1].rel == top[i].rel && top[i - 1].fact_id < top[i].fact_id)));
  }
  CHECK(top[0].question_id == "q01");
  CHECK(top[0].option_label == 'C');
}

TEST_CASE("identical fact ranks first with maximal score") {
  FactCorpus corpus({"cows eat grass", "hawks eat lizards", "plants need sunlight"});
  TfidfCosineScorer scorer(corpus.texts());
  Hypothesis h;
  h.text = "plants need sunlight";
  auto top = retrieve_facts(h, scorer, corpus, 5);
  REQUIRE(top.size() == 3);
  CHECK(top[0].fact_id == 2);
  CHECK(top[0].rel == doctest::Approx(1.0));
  CHECK_THROWS_AS(retrieve_facts(h, scorer, corpus, 0), std::invalid_argument);
  CHECK_THROWS_AS(retrieve_facts(h, BrokenScorer{}, corpus, 1), ScorerError);
}

TEST_CASE("sts pairs: gold pair, bucket round robin, determinism") {
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("f" + std::to_string(i));
  FactCorpus corpus(texts);
  std::vector<Question> qs = {question_with_gold("a", "f0"), question_with_gold("b", "f7")};
  qs.push_back(oracle::make_question("c", 'A', ""));
  qs.back().gold_fact.reset();

  StsPairOptions opt;
  opt.samples_per_q = 10;
  opt.seed = 42;
  auto r = generate_sts_training_pairs(qs, corpus, BucketScorer{}, opt);
  CHECK(r.skipped == 1);
  REQUIRE(r.pairs.size() == 22);
  for (std::size_t q = 0; q < 2; ++q) {
    const auto& gold = r.pairs[q * 11];
    CHECK(gold.target == 5.0);
    CHECK(gold.fact_text == *qs[q].gold_fact);
    CHECK(gold.hypothesis_text == generate_hypotheses(qs[q])[1].text);
    std::map<int, int> per_bucket;
    std::set<std::string> seen;
    for (std::size_t k = 1; k <= 10; ++k) {
      const auto& p = r.pairs[q * 11 + k];
      CHECK(p.fact_text != *qs[q].gold_fact);
      CHECK(seen.insert(p.fact_text).second);
      ++per_bucket[int(p.target)];
    }
    CHECK(per_bucket == std::map<int, int>{{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}});
  }

  CHECK(generate_sts_training_pairs(qs, corpus, BucketScorer{}, opt).pairs == r.pairs);
  opt.seed = 43;
  CHECK(generate_sts_training_pairs(qs, corpus, BucketScorer{}, opt).pairs != r.pairs);

  opt.samples_per_q = 0;
  CHECK(generate_sts_training_pairs(qs, corpus, BucketScorer{}, opt).pairs.size() == 2);

  opt.samples_per_q = 500;
  CHECK(generate_sts_training_pairs(qs, corpus, BucketScorer{}, opt).pairs.size() == 2 * 50);

  TfidfCosineScorer unit_range(corpus.texts());
  CHECK_THROWS_AS(generate_sts_training_pairs(qs, corpus, unit_range, opt), ConfigError);
}

TEST_CASE("lexical sts scorer orders the ocean examples") {
  auto facts = load_facts(std::string(ABDUCTIR_TEST_DATA) + "/e2e/openbook.txt");
  auto inner = std::make_shared<TfidfCosineScorer>(facts.texts());
  ScaledScorer sts(inner, 5.0);
  CHECK(sts.range() == ScoreRange{0.0, 5.0});
  const std::string gold = "deep sea animals live deep in the ocean";
  const double coral = sts.score_pair(gold, "coral lives in the ocean");
  const double fish = sts.score_pair(gold, "a fish lives in water");
  CHECK(coral > fish);
  CHECK(coral <= 5.0);
  CHECK(fish >= 0.0);
  CHECK(sts.score_pair(gold, gold) == doctest::Approx(5.0));
}

TEST_CASE("sts pairs file round trip") {
  oracle::TempDir tmp("sts");
  std::vector<StsTrainingPair> pairs = {{"h one", "f\tone", 5.0}, {"h\ntwo", "f two", 0.1 + 0.2}};
  save_sts_pairs(tmp.str("p.tsv"), pairs);
  auto back = load_sts_pairs(tmp.str("p.tsv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].fact_text == "f one");
  CHECK(back[1].hypothesis_text == "h two");
  CHECK(back[1].target == 0.1 + 0.2);
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
  CHECK(format_double(5.0) == "5");
}
