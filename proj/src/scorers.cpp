#include "abductir/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "abductir/errors.hpp"

namespace abductir {

double SimilarityScorer::score_pair(std::string_view a, std::string_view b) const {
  std::string candidate(b);
  return score(a, std::span<const std::string>(&candidate, 1)).at(0);
}

std::vector<double> score_checked(const SimilarityScorer& scorer, std::string_view query,
                                  std::span<const std::string> candidates) {
  auto scores = scorer.score(query, candidates);
  if (scores.size() != candidates.size()) {
    throw ScorerError(scorer.name() + " returned " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(candidates.size()) + " candidates");
  }
  const auto range = scorer.range();
  for (double v : scores) {
    if (!std::isfinite(v) || !range.contains(v)) {
      throw ScorerError(scorer.name() + " produced score " + std::to_string(v) + " outside [" +
                        std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]");
    }
  }
  return scores;
}

TfidfCosineScorer::TfidfCosineScorer(std::span<const std::string> corpus, TokenizerConfig tokenizer)
    : TfidfCosineScorer(std::make_shared<const InvertedIndex>(
                            InvertedIndex::build(corpus, IndexMode::tfidf(), std::move(tokenizer))),
                        corpus) {}

TfidfCosineScorer::TfidfCosineScorer(std::shared_ptr<const InvertedIndex> index,
                                     std::span<const std::string> corpus)
    : index_(std::move(index)) {
  if (index_->doc_count() != corpus.size()) {
    throw std::invalid_argument("TfidfCosineScorer: corpus does not match index");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) doc_of_text_.emplace(corpus[i], i);
}

const SparseVector& TfidfCosineScorer::vector_of(std::string_view text, SparseVector& scratch) const {
  auto it = doc_of_text_.find(std::string(text));
  if (it != doc_of_text_.end()) return index_->doc_vector(it->second);
  scratch = index_->vectorize_text(text);
  return scratch;
}

std::vector<double> TfidfCosineScorer::score(std::string_view query,
                                             std::span<const std::string> candidates) const {
  SparseVector q_scratch;
  const SparseVector& q = vector_of(query, q_scratch);
  std::vector<double> out;
  out.reserve(candidates.size());
  SparseVector c_scratch;
  for (const auto& c : candidates) out.push_back(cosine_sim(q, vector_of(c, c_scratch)));
  return out;
}

ScaledScorer::ScaledScorer(std::shared_ptr<const SimilarityScorer> inner, double factor)
    : inner_(std::move(inner)), factor_(factor) {
  if (!(factor_ > 0.0)) throw std::invalid_argument("ScaledScorer factor must be positive");
}

std::string ScaledScorer::name() const {
  std::ostringstream out;
  out << inner_->name() << "*" << factor_;
  return out.str();
}

ScoreRange ScaledScorer::range() const {
  auto r = inner_->range();
  return {r.lo * factor_, r.hi * factor_};
}

std::vector<double> ScaledScorer::score(std::string_view query, std::span<const std::string> candidates) const {
  auto out = inner_->score(query, candidates);
  for (auto& v : out) v *= factor_;
  return out;
}

EmbeddingCosineScorer::EmbeddingCosineScorer(std::shared_ptr<const EmbeddingTable> table)
    : table_(std::move(table)) {
  if (!table_ || table_->empty()) throw DataError("embedding scorer needs a nonempty table");
}

std::vector<double> EmbeddingCosineScorer::score(std::string_view query,
                                                 std::span<const std::string> candidates) const {
  std::vector<std::string> missing;
  const auto* q = table_->find(query);
  if (!q) missing.emplace_back(query);
  for (const auto& c : candidates) {
    if (!table_->contains(c) && std::find(missing.begin(), missing.end(), c) == missing.end()) {
      missing.push_back(c);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing embedding key(s):";
    for (const auto& m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    double cos = dense_cosine(*q, *table_->find(c));
    out.push_back(5.0 * std::clamp(cos, 0.0, 1.0));
  }
  return out;
}

std::vector<double> RemoteSimilarityScorer::score(std::string_view query,
                                                  std::span<const std::string> candidates) const {
  std::vector<TextPair> pairs;
  pairs.reserve(candidates.size());
  for (const auto& c : candidates) pairs.emplace_back(std::string(query), c);
  return client_.score_similarity(pairs);
}

double AnswerScorer::score(std::string_view passage, std::string_view question, std::string_view option) const {
  AnswerTriple t{std::string(passage), std::string(question), std::string(option)};
  return score_batch(std::span<const AnswerTriple>(&t, 1)).at(0);
}

LexicalAnswerScorer::LexicalAnswerScorer(TokenizerConfig tokenizer) : tokenizer_(std::move(tokenizer)) {
  tokenizer_.remove_stopwords = true;
}

double LexicalAnswerScorer::score_one(std::string_view passage, std::string_view question,
                                      std::string_view option) const {
  TokenSet probe = TokenSet::from_text(option, tokenizer_);
  for (auto& t : tokenize(question, tokenizer_)) probe.insert(std::move(t));
  if (probe.empty()) return 0.0;
  TokenSet context = TokenSet::from_text(passage, tokenizer_);
  std::size_t hits = 0;
  for (const auto& t : probe) hits += context.contains(t) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(probe.size());
}

std::vector<double> LexicalAnswerScorer::score_batch(std::span<const AnswerTriple> triples) const {
  std::vector<double> out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back(score_one(t.passage, t.question, t.option));
  return out;
}

std::vector<double> RemoteAnswerScorer::score_batch(std::span<const AnswerTriple> triples) const {
  return client_.score_answers(triples);
}

}  // namespace abductir
