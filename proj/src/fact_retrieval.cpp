#include "abductir/fact_retrieval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "abductir/errors.hpp"
#include "abductir/inverted_index.hpp"
#include "abductir/random.hpp"

namespace abductir {

namespace {

std::string tsv_safe(std::string_view s) {
  std::string out(s);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::vector<ScoredFact> retrieve_facts(const Hypothesis& h, const SimilarityScorer& scorer,
                                       const FactCorpus& corpus, std::size_t top_n) {
  if (top_n == 0) throw std::invalid_argument("retrieve_facts: top_n must be >= 1");
  auto scores = score_checked(scorer, h.text, corpus.texts());
  std::vector<ScoredFact> out;
  for (const auto& d : top_n_dense(scores, top_n)) {
    out.push_back({h.question_id, h.option_label, d.doc_id, corpus.text(d.doc_id), d.score});
  }
  return out;
}

StsPairResult generate_sts_training_pairs(std::span<const Question> questions, const FactCorpus& corpus,
                                          const SimilarityScorer& sts_scorer, const StsPairOptions& options) {
  if (sts_scorer.range() != ScoreRange{0.0, 5.0}) {
    throw ConfigError("STS pair generation needs a scorer with range [0, 5]; " + sts_scorer.name() +
                      " has [" + format_double(sts_scorer.range().lo) + ", " +
                      format_double(sts_scorer.range().hi) + "]");
  }
  StsPairResult result;
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    const Question& q = questions[qi];
    if (!q.gold_fact || trim(*q.gold_fact).empty()) {
      ++result.skipped;
      continue;
    }
    const std::string& gold = *q.gold_fact;
    auto hyps = generate_hypotheses(q, options.tokenizer);
    const std::string& hyp = hyps[q.answer_index()].text;
    result.pairs.push_back({hyp, gold, 5.0});
    if (options.samples_per_q == 0) continue;

    const std::string gold_key = normalize_for_match(gold);
    std::vector<std::string> others;
    for (const auto& f : corpus.texts()) {
      if (normalize_for_match(f) != gold_key) others.push_back(f);
    }
    if (others.empty()) continue;
    auto targets = score_checked(sts_scorer, gold, others);

    std::array<std::vector<std::size_t>, 5> buckets;
    for (std::size_t i = 0; i < others.size(); ++i) {
      auto b = static_cast<std::size_t>(std::clamp(std::floor(targets[i]), 0.0, 4.0));
      buckets[b].push_back(i);
    }
    std::mt19937_64 rng(derive_seed(options.seed, qi));
    for (auto& b : buckets) portable_shuffle(std::span<std::size_t>(b), rng);

    std::array<std::size_t, 5> cursor{};
    std::size_t taken = 0;
    bool progressed = true;
    while (taken < options.samples_per_q && progressed) {
      progressed = false;
      for (std::size_t b = 0; b < buckets.size() && taken < options.samples_per_q; ++b) {
        if (cursor[b] == buckets[b].size()) continue;
        std::size_t i = buckets[b][cursor[b]++];
        result.pairs.push_back({hyp, others[i], targets[i]});
        ++taken;
        progressed = true;
      }
    }
  }
  return result;
}

void save_sts_pairs(const std::string& path, std::span<const StsTrainingPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& p : pairs) {
    out << tsv_safe(p.hypothesis_text) << '\t' << tsv_safe(p.fact_text) << '\t' << format_double(p.target)
        << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<StsTrainingPair> load_sts_pairs(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<StsTrainingPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    std::string_view line(content.data() + pos, (nl == std::string::npos ? content.size() : nl) - pos);
    pos = nl == std::string::npos ? content.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    auto num = line.substr(t2 + 1);
    double target = 0.0;
    auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), target);
    if (ec != std::errc() || end != num.data() + num.size() || !(target >= 0.0 && target <= 5.0)) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": bad target '" + std::string(num) + "'");
    }
    pairs.push_back({std::string(line.substr(0, t1)), std::string(line.substr(t1 + 1, t2 - t1 - 1)), target});
  }
  return pairs;
}

}  // namespace abductir
