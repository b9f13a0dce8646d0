#include <string>
#include <vector>

#include "abductir/text.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace abductir;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize keeps content words and hyphenated compounds") {
  CHECK(tokenize("hawks eat lizards") == Tokens{"hawks", "eat", "lizards"});
  CHECK(tokenize("") == Tokens{});
  CHECK(tokenize("A red-tailed hawk is searching for prey.") == Tokens{"red-tailed", "hawk", "searching", "prey"});
}

TEST_CASE("tokenize edge cases") {
  CHECK(tokenize("   \t\n") == Tokens{});
  CHECK(tokenize("-leading and trailing-") == Tokens{"leading", "trailing"});
  CHECK(tokenize("a--b") == Tokens{"b"});
  CHECK(tokenize("x--w z") == Tokens{"x", "w", "z"});
  CHECK(tokenize("CO2 levels, 40%") == Tokens{"co2", "levels", "40"});
  CHECK(tokenize("Ça va") == Tokens{"Ça", "va"});

  TokenizerConfig keep;
  keep.remove_stopwords = false;
  CHECK(tokenize("The Sun is HOT", keep) == Tokens{"the", "sun", "is", "hot"});
  keep.lowercase = false;
  CHECK(tokenize("The Sun", keep) == Tokens{"The", "Sun"});
}

TEST_CASE("stemming strips plurals and is idempotent") {
  CHECK(strip_plural("hawks") == "hawk");
  CHECK(strip_plural("lizards") == "lizard");
  CHECK(strip_plural("flies") == "fly");
  CHECK(strip_plural("glasses") == "glass");
  CHECK(strip_plural("grass") == "grass");
  CHECK(strip_plural("virus") == "virus");
  CHECK(strip_plural("gas") == "gas");

  oracle::Gen g(7);
  const std::string alphabet = "aeisuy";
  for (int t = 0; t < 2000; ++t) {
    std::string w;
    const std::size_t n = g.between(1, 8);
    for (std::size_t i = 0; i < n; ++i) w += alphabet[g.below(alphabet.size())];
    const auto once = strip_plural(w);
    CHECK_MESSAGE(strip_plural(once) == once, w);
  }

  TokenizerConfig stem;
  stem.stem = true;
  CHECK(tokenize("Hawks eat lizards", stem) == Tokens{"hawk", "eat", "lizard"});
}

TEST_CASE("stopword list") {
  CHECK(StopwordList::builtin().size() == 179);
  CHECK(StopwordList::builtin().contains("the"));
  CHECK_FALSE(StopwordList::builtin().contains("gecko"));
  auto custom = StopwordList::parse("# comment\n\nfoo\n  Bar \n");
  CHECK(custom.size() == 2);
  CHECK(custom.contains("bar"));

  TokenizerConfig c;
  c.stopwords = std::make_shared<const StopwordList>(custom);
  CHECK(tokenize("foo the bar baz", c) == Tokens{"the", "baz"});
}

TEST_CASE("token sets keep first-seen order") {
  auto s = TokenSet::from_text("prey hawk prey gecko hawk");
  CHECK(s.tokens() == Tokens{"prey", "hawk", "gecko"});
  CHECK(s.joined() == "prey hawk gecko");
  CHECK_FALSE(s.insert("hawk"));
  CHECK(s.insert("lizard"));
  CHECK(s.contains("lizard"));
}

TEST_CASE("sparse vectors and cosine") {
  SparseVector v({{"a", 1.0}, {"b", 2.0}});
  CHECK(cosine_sim(v, v) == doctest::Approx(1.0));
  CHECK(cosine_sim(SparseVector({{"a", 1.0}}), SparseVector({{"b", 1.0}})) == 0.0);
  CHECK(cosine_sim(SparseVector({{"a", 1.0}, {"b", 1.0}}), SparseVector({{"b", 1.0}, {"c", 1.0}})) ==
        doctest::Approx(0.5));
  CHECK(cosine_sim(SparseVector{}, v) == 0.0);

  SparseVector merged({{"b", 1.0}, {"a", 2.0}, {"b", 0.5}, {"z", 0.0}});
  CHECK(merged.size() == 2);
  CHECK(merged.weight("b") == 1.5);
  CHECK(merged.weight("z") == 0.0);
  CHECK_THROWS_AS(SparseVector({{"a", -1.0}}), std::invalid_argument);

  oracle::Gen g(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<SparseVector::Entry> ea, eb;
    for (int i = 0; i < 6; ++i) {
      if (g.coin()) ea.emplace_back(g.word(8), g.uniform(0, 3));
      if (g.coin()) eb.emplace_back(g.word(8), g.uniform(0, 3));
    }
    SparseVector a(ea), b(eb);
    const double c = cosine_sim(a, b);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(c == doctest::Approx(cosine_sim(b, a)));
  }
}

TEST_CASE("normalize_for_match") {
  CHECK(normalize_for_match("  Hawks eat, LIZARDS. ") == "hawks eat lizards");
  CHECK(normalize_for_match("a\t\tb\nc") == "a b c");
  CHECK(normalize_for_match("...") == "");
  CHECK(trim("  x y \n") == "x y");
}
