#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "abductir/corpus_io.hpp"
#include "abductir/inverted_index.hpp"
#include "abductir/remote.hpp"

namespace abductir {

struct ScoreRange {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v, double eps = 1e-9) const { return v >= lo - eps && v <= hi + eps; }
  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

/// Pluggable text-similarity scorer. Implementations return raw scores in
/// their own range (TF-IDF cosine [0, 1], STS-style [0, 5]); callers
/// normalize when they need to. Must be deterministic and safe to call
/// concurrently.
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::string name() const = 0;
  virtual ScoreRange range() const = 0;
  /// One score per candidate, aligned with `candidates`.
  virtual std::vector<double> score(std::string_view query, std::span<const std::string> candidates) const = 0;

  double score_pair(std::string_view a, std::string_view b) const;
};

/// Calls scorer.score and checks that every value is finite and inside the
/// scorer's declared range. Throws ScorerError otherwise.
std::vector<double> score_checked(const SimilarityScorer& scorer, std::string_view query,
                                  std::span<const std::string> candidates);

/// TF-IDF cosine with idf fitted on a reference corpus. Vectors of the
/// reference sentences are taken from the index; other texts are vectorized
/// on the fly.
class TfidfCosineScorer final : public SimilarityScorer {
 public:
  explicit TfidfCosineScorer(std::span<const std::string> corpus, TokenizerConfig tokenizer = {});
  explicit TfidfCosineScorer(std::shared_ptr<const InvertedIndex> index, std::span<const std::string> corpus);

  std::string name() const override { return "tfidf-cosine"; }
  ScoreRange range() const override { return {0.0, 1.0}; }
  std::vector<double> score(std::string_view query, std::span<const std::string> candidates) const override;

  const InvertedIndex& index() const noexcept { return *index_; }
  std::shared_ptr<const InvertedIndex> shared_index() const noexcept { return index_; }
  const SparseVector& vector_of(std::string_view text, SparseVector& scratch) const;

 private:
  std::shared_ptr<const InvertedIndex> index_;
  std::unordered_map<std::string, std::size_t> doc_of_text_;
};

/// Multiplies another scorer's output by a constant; used to put a [0, 1]
/// scorer on the [0, 5] STS scale.
class ScaledScorer final : public SimilarityScorer {
 public:
  ScaledScorer(std::shared_ptr<const SimilarityScorer> inner, double factor);

  std::string name() const override;
  ScoreRange range() const override;
  std::vector<double> score(std::string_view query, std::span<const std::string> candidates) const override;

 private:
  std::shared_ptr<const SimilarityScorer> inner_;
  double factor_;
};

/// Cosine of precomputed embeddings, negative values clamped to 0, scaled
/// by 5. Every text must be a key in the table.
class EmbeddingCosineScorer final : public SimilarityScorer {
 public:
  explicit EmbeddingCosineScorer(std::shared_ptr<const EmbeddingTable> table);

  std::string name() const override { return "embedding-cosine"; }
  ScoreRange range() const override { return {0.0, 5.0}; }
  /// Throws DataError listing every missing key.
  std::vector<double> score(std::string_view query, std::span<const std::string> candidates) const override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
};

/// STS similarity served by the scoring service.
class RemoteSimilarityScorer final : public SimilarityScorer {
 public:
  explicit RemoteSimilarityScorer(BridgeClient client) : client_(std::move(client)) {}

  std::string name() const override { return "remote:" + client_.config().model_id; }
  ScoreRange range() const override { return {0.0, 5.0}; }
  std::vector<double> score(std::string_view query, std::span<const std::string> candidates) const override;

 private:
  BridgeClient client_;
};

/// Scores score(passage, question, option) >= 0. Deterministic; safe to call
/// concurrently.
class AnswerScorer {
 public:
  virtual ~AnswerScorer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> score_batch(std::span<const AnswerTriple> triples) const = 0;

  double score(std::string_view passage, std::string_view question, std::string_view option) const;
};

/// |tokens(option + question) ∩ tokens(passage)| / |tokens(option + question)|
/// over stopword-free token sets; 0 when the option and question have no
/// content tokens.
class LexicalAnswerScorer final : public AnswerScorer {
 public:
  explicit LexicalAnswerScorer(TokenizerConfig tokenizer = {});

  std::string name() const override { return "lexical"; }
  std::vector<double> score_batch(std::span<const AnswerTriple> triples) const override;
  double score_one(std::string_view passage, std::string_view question, std::string_view option) const;

 private:
  TokenizerConfig tokenizer_;
};

class RemoteAnswerScorer final : public AnswerScorer {
 public:
  explicit RemoteAnswerScorer(BridgeClient client) : client_(std::move(client)) {}

  std::string name() const override { return "remote:" + client_.config().model_id; }
  std::vector<double> score_batch(std::span<const AnswerTriple> triples) const override;

 private:
  BridgeClient client_;
};

}  // namespace abductir
