#include <string>

#include "abductir/hypothesis.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace abductir;

TEST_CASE("wh-word rewritten in place") {
  auto h = make_hypothesis_text("A red-tailed hawk is searching for prey. It is most likely to swoop down on what?",
                                "a gecko");
  CHECK(h.text == "A red-tailed hawk is searching for prey. It is most likely to swoop down on a gecko.");
  CHECK(h.rule == HypothesisRule::wh_in_place);
}

TEST_CASE("bare question mark slot") {
  auto h = make_hypothesis_text("The best way to save money is ?", "to quit eating lunch out");
  CHECK(h.text == "The best way to save money is to quit eating lunch out.");
  CHECK(h.rule == HypothesisRule::placeholder);
}

TEST_CASE("blank placeholder") {
  auto h = make_hypothesis_text("Plants need ___ to grow", "sunlight");
  CHECK(h.text == "Plants need sunlight to grow.");
  CHECK(h.rule == HypothesisRule::placeholder);
}

TEST_CASE("statement stems get the option appended") {
  auto h = make_hypothesis_text("Frilled sharks and angler fish live far beneath the surface of the ocean, which is why "
                                "they are known as",
                                "Deep sea animals");
  CHECK(h.text ==
        "Frilled sharks and angler fish live far beneath the surface of the ocean, which is why they are known as "
        "Deep sea animals.");
  CHECK(h.rule == HypothesisRule::append);
}

TEST_CASE("empty option keeps the stem") {
  auto h = make_hypothesis_text("What do hawks eat?", "");
  CHECK(h.text == "What do hawks eat?");
  CHECK(h.rule == HypothesisRule::empty_option);
}

TEST_CASE("every hypothesis ends with one period and mentions the option") {
  oracle::Gen g(5);
  const char* stems[] = {"What do hawks eat?",  "Which of these would melt?", "A plant needs what?",
                         "Birds can",           "The moon is ___ at night",   "Which animal eats plants?",
                         "Heat is a form of ?", "Sound travels fastest through what?"};
  for (const char* stem : stems) {
    for (int t = 0; t < 20; ++t) {
      auto option = g.sentence(30, 1, 4);
      auto h = make_hypothesis_text(stem, option);
      CHECK_MESSAGE(h.text.find(option) != std::string::npos, stem);
      REQUIRE_FALSE(h.text.empty());
      CHECK(h.text.back() == '.');
      CHECK(h.text.find("..") == std::string::npos);
      CHECK(h.text.find('?') == std::string::npos);
    }
  }
}

TEST_CASE("generate_hypotheses covers all four options") {
  auto qs = load_questions(std::string(ABDUCTIR_TEST_DATA) + "/gecko/questions.jsonl");
  auto hs = generate_hypotheses(qs[0]);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(hs[i].question_id == "q01");
    CHECK(hs[i].option_label == kOptionLabels[i]);
    CHECK_FALSE(hs[i].degenerate());
  }
  CHECK(hs[2].token_set.tokens() ==
        std::vector<std::string>{"red-tailed", "hawk", "searching", "prey", "likely", "swoop", "gecko"});
}
