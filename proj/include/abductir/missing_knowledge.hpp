#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abductir/abduction.hpp"
#include "abductir/corpus_io.hpp"
#include "abductir/hypothesis.hpp"
#include "abductir/inverted_index.hpp"
#include "abductir/scorers.hpp"

namespace abductir {

struct KnowledgeItem {
  std::string question_id;
  char option_label = 'A';
  std::size_t sent_id = 0;
  std::string text;
  double ir_score = 0.0;
  double rel = 0.0;
  double red = 0.0;
  double rank_score = 0.0;

  friend bool operator==(const KnowledgeItem&, const KnowledgeItem&) = default;
};

struct CandidatePool {
  std::vector<KnowledgeItem> items;
  /// Divisor that maps rel onto [0, 1]: the rel scorer's range maximum, or
  /// the largest IR score in the pool when rel is the raw IR score.
  double rel_max = 1.0;
};

/// Top pool_m sentences for the query under the index's scoring mode. With a
/// rel scorer, each hit is re-scored against the hypothesis text and the pool
/// is re-sorted by rel (ties: ascending sent_id); without one, rel is the IR
/// score. An empty query, or one without hits, yields an empty pool.
CandidatePool retrieve_candidates(const AbducedQuery& query, const Hypothesis& h, const InvertedIndex& index,
                                  const KnowledgeCorpus& corpus, const SimilarityScorer* rel_scorer,
                                  std::size_t pool_m);

/// sim(pool[i], pool[j]) in [0, 1].
using PoolSimilarity = std::function<double(std::size_t, std::size_t)>;

/// Greedy information-gain selection. The first pick is the highest rel.
/// After each pick every remaining candidate updates
///   red = max(red, sim(last picked, candidate))
/// and the next pick maximizes (1 - red) * rel / rel_max. Ties go to the
/// smaller sent_id. Selected items carry red and rank_score at the time they
/// were picked. Throws ScorerError if sim leaves [0, 1].
std::vector<KnowledgeItem> information_gain_rerank(std::span<const KnowledgeItem> pool, const PoolSimilarity& sim,
                                                   std::size_t top_k, double rel_max);

/// Same selection with red recomputed as the max similarity to every selected
/// item; kept as a cross-check of the recurrence.
std::vector<KnowledgeItem> information_gain_rerank_full(std::span<const KnowledgeItem> pool,
                                                        const PoolSimilarity& sim, std::size_t top_k,
                                                        double rel_max);

/// Pool similarity backed by a scorer, divided by the scorer's range maximum
/// and clamped to [0, 1]. Rows are computed on first use, so a rerank of
/// top_k items costs at most top_k scorer calls. Not thread-safe; use one per
/// pool.
class ScorerPoolSimilarity {
 public:
  ScorerPoolSimilarity(std::span<const KnowledgeItem> pool, const SimilarityScorer& scorer);

  double operator()(std::size_t i, std::size_t j) const;

 private:
  const SimilarityScorer& scorer_;
  std::vector<std::string> texts_;
  mutable std::vector<std::optional<std::vector<double>>> rows_;
};

}  // namespace abductir
