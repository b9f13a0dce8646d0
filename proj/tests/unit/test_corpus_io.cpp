#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "abductir/corpus_io.hpp"
#include "abductir/errors.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace abductir;

namespace {

const char* kRecord =
    R"({"id": "q1", "question": {"stem": "What do hawks eat?", "choices": [{"label": "A", "text": "grass"},)"
    R"( {"label": "B", "text": "lizards"}, {"label": "C", "text": "rocks"}, {"label": "D", "text": "water"}]},)"
    R"( "answerKey": "B", "fact1": "hawks eat lizards"})";

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string error_of(const std::string& content) {
  try {
    parse_questions(content, "f.jsonl");
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("question parsing") {
  auto qs = parse_questions(std::string(kRecord) + "\n\n");
  REQUIRE(qs.size() == 1);
  const auto& q = qs[0];
  CHECK(q.id == "q1");
  CHECK(q.answer_key == 'B');
  CHECK(q.answer_index() == 1);
  CHECK(q.options[1].text == "lizards");
  CHECK(q.gold_fact == "hawks eat lizards");
  CHECK_FALSE(q.gold_missing_knowledge.has_value());

  auto j = json::parse(kRecord);
  j.erase("fact1");
  j["gold_fact"] = "gold";
  j["gold_missing_knowledge"] = "a gecko is a lizard";
  auto q2 = parse_question(j);
  CHECK(q2.gold_fact == "gold");
  REQUIRE(q2.gold_missing_knowledge.has_value());
  CHECK(q2.gold_missing_knowledge->size() == 1);

  // Options arrive in any label order and are stored A..D.
  auto shuffled = json::parse(kRecord);
  std::swap(shuffled["question"]["choices"][0], shuffled["question"]["choices"][3]);
  CHECK(parse_question(shuffled) == q);
}

TEST_CASE("question errors name the line") {
  CHECK(error_of("").find("no questions") != std::string::npos);
  CHECK(error_of(std::string(kRecord) + "\n{oops").find("line 2") != std::string::npos);
  CHECK(error_of(std::string(kRecord) + "\n" + kRecord).find("duplicate question id") != std::string::npos);
}

TEST_CASE("every single-field corruption of a valid record is rejected") {
  auto base = json::parse(kRecord);
  std::vector<json> bad;
  auto with = [&](auto mutate) {
    json j = base;
    mutate(j);
    bad.push_back(j);
  };
  with([](json& j) { j.erase("id"); });
  with([](json& j) { j["id"] = ""; });
  with([](json& j) { j["id"] = 7; });
  with([](json& j) { j.erase("question"); });
  with([](json& j) { j["question"]["stem"] = "  "; });
  with([](json& j) { j["question"]["choices"].erase(0); });
  with([](json& j) { j["question"]["choices"].push_back({{"label", "E"}, {"text", "x"}}); });
  with([](json& j) { j["question"]["choices"][1]["label"] = "A"; });
  with([](json& j) { j["question"]["choices"][1]["label"] = "Z"; });
  with([](json& j) { j["question"]["choices"][2].erase("text"); });
  with([](json& j) { j["answerKey"] = "E"; });
  with([](json& j) { j.erase("answerKey"); });
  with([](json& j) { j["gold_missing_knowledge"] = 3; });
  with([](json& j) { j["gold_missing_knowledge"] = json::array({"ok", 2}); });
  for (const auto& j : bad) CHECK_THROWS_AS(parse_question(j), DataError);
}

TEST_CASE("questions round trip through a file") {
  oracle::TempDir tmp("questions");
  auto qs = load_questions(std::string(ABDUCTIR_TEST_DATA) + "/e2e/questions.jsonl");
  CHECK(qs.size() == 20);
  save_questions(tmp.str("q.jsonl"), qs);
  CHECK(load_questions(tmp.str("q.jsonl")) == qs);
}

TEST_CASE("sentence corpora") {
  oracle::TempDir tmp("corpus");
  write(tmp.str("f.txt"),
        "\"a punnett square is used to identify the percent chance of a trait being passed down from a parent to "
        "its offspring.\"\n\n  hawks eat lizards  \r\n");
  auto facts = load_facts(tmp.str("f.txt"));
  REQUIRE(facts.size() == 2);
  CHECK(facts.text(0) ==
        "a punnett square is used to identify the percent chance of a trait being passed down from a parent to its "
        "offspring.");
  CHECK(facts.text(1) == "hawks eat lizards");

  save_sentences(tmp.str("g.txt"), facts.texts());
  CHECK(load_facts(tmp.str("g.txt")) == facts);

  write(tmp.str("three.txt"), "one\n\ntwo\n");
  CHECK(load_knowledge(tmp.str("three.txt")).size() == 2);

  write(tmp.str("empty.txt"), "\n\n");
  CHECK_THROWS_AS(load_facts(tmp.str("empty.txt")), DataError);
  CHECK_THROWS_AS(FactCorpus(std::vector<std::string>{"a", " "}), DataError);
}

TEST_CASE("embedding table validation") {
  EmbeddingTable t;
  t.add("a", {1, 2, 3, 4});
  t.add("b", {0, 0, 0, 1});
  CHECK(t.dim() == 4);
  CHECK_THROWS_WITH_AS(t.add("a", {1, 1, 1, 1}), doctest::Contains("duplicate key"), DataError);
  CHECK_THROWS_AS(t.add("c", {1, 2}), DataError);
  CHECK_THROWS_AS(t.add("d", {std::nanf(""), 0, 0, 0}), DataError);
  CHECK_THROWS_AS(t.add("e\tf", {1, 1, 1, 1}), DataError);
  CHECK_THROWS_AS(t.at("zzz"), DataError);

  CHECK_THROWS_AS(EmbeddingTable::parse_tsv("k\t1\t2\nj\t1\n"), DataError);
  CHECK_THROWS_AS(EmbeddingTable::parse_tsv("k\t1\tnan\n"), DataError);
  auto parsed = EmbeddingTable::parse_tsv("k one\t1 2\nk two\t3\t4\n");
  CHECK(parsed.size() == 2);
  CHECK(parsed.at("k two")[1] == 4.0f);

  CHECK(dense_cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}) == 0.0);
  CHECK(dense_cosine(std::vector<float>{0, 0}, std::vector<float>{0, 1}) == 0.0);
  CHECK(dense_cosine(std::vector<float>{2, 2}, std::vector<float>{1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("10k embeddings round trip byte for byte") {
  oracle::TempDir tmp("emb");
  oracle::Gen g(99);
  EmbeddingTable t;
  for (int i = 0; i < 10000; ++i) {
    std::vector<float> v(8);
    for (auto& x : v) x = static_cast<float>(g.uniform(-1, 1) * std::pow(10.0, double(g.below(7)) - 3.0));
    t.add("sentence number " + std::to_string(i) + " " + g.word(50), v);
  }
  t.save_tsv(tmp.str("a.tsv"));
  auto from_tsv = EmbeddingTable::load(tmp.str("a.tsv"));
  CHECK(from_tsv == t);
  from_tsv.save_tsv(tmp.str("b.tsv"));
  CHECK(oracle::slurp(tmp.str("a.tsv")) == oracle::slurp(tmp.str("b.tsv")));

  t.save_binary(tmp.str("a.bin"));
  auto from_bin = EmbeddingTable::load(tmp.str("a.bin"));
  CHECK(from_bin == t);
  from_bin.save_binary(tmp.str("b.bin"));
  CHECK(oracle::slurp(tmp.str("a.bin")) == oracle::slurp(tmp.str("b.bin")));

  auto bin = oracle::slurp(tmp.str("a.bin"));
  write(tmp.str("cut.bin"), bin.substr(0, bin.size() - 3));
  CHECK_THROWS_AS(EmbeddingTable::load(tmp.str("cut.bin")), DataError);
}
