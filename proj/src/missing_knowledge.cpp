#include "abductir/missing_knowledge.hpp"

#include <algorithm>
#include <cmath>

#include "abductir/errors.hpp"

namespace abductir {

namespace {

double checked_sim(const PoolSimilarity& sim, std::size_t a, std::size_t b) {
  double s = sim(a, b);
  if (!(s >= -1e-12 && s <= 1.0 + 1e-12)) {
    throw ScorerError("pool similarity " + std::to_string(s) + " outside [0, 1]");
  }
  return std::clamp(s, 0.0, 1.0);
}

bool better(double score, std::size_t sent_id, double best_score, std::size_t best_id) {
  if (score != best_score) return score > best_score;
  return sent_id < best_id;
}

template <typename UpdateRed>
std::vector<KnowledgeItem> greedy_select(std::span<const KnowledgeItem> pool, std::size_t top_k, double rel_max,
                                         UpdateRed update_red) {
  if (top_k == 0) throw std::invalid_argument("information_gain_rerank: top_k must be >= 1");
  if (!(rel_max > 0.0)) throw std::invalid_argument("information_gain_rerank: rel_max must be positive");
  const std::size_t n = pool.size();
  std::vector<double> rel(n), red(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pool[i].rel)) throw ScorerError("non-finite rel for sentence " + std::to_string(pool[i].sent_id));
    rel[i] = pool[i].rel / rel_max;
  }
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> order;
  std::vector<KnowledgeItem> out;
  const std::size_t k = std::min(top_k, n);
  for (std::size_t step = 0; step < k; ++step) {
    if (step > 0) update_red(order, taken, red);
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      double score = step == 0 ? rel[c] : (1.0 - red[c]) * rel[c];
      if (best == n || better(score, pool[c].sent_id, best_score, pool[best].sent_id)) {
        best = c;
        best_score = score;
      }
    }
    taken[best] = true;
    order.push_back(best);
    KnowledgeItem item = pool[best];
    item.red = red[best];
    item.rank_score = best_score;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

CandidatePool retrieve_candidates(const AbducedQuery& query, const Hypothesis& h, const InvertedIndex& index,
                                  const KnowledgeCorpus& corpus, const SimilarityScorer* rel_scorer,
                                  std::size_t pool_m) {
  if (pool_m == 0) throw std::invalid_argument("retrieve_candidates: pool_m must be >= 1");
  CandidatePool pool;
  // Generated queries are sentences; re-tokenize them with the index's rules.
  auto tokens = query.model == AbductionModel::generated ? index.tokens(query.query_text) : query.tokens.tokens();
  if (tokens.empty()) return pool;
  for (const auto& hit : index.query(tokens, pool_m)) {
    KnowledgeItem item;
    item.question_id = query.question_id;
    item.option_label = query.option_label;
    item.sent_id = hit.doc_id;
    item.text = corpus.text(hit.doc_id);
    item.ir_score = hit.score;
    item.rel = hit.score;
    pool.items.push_back(std::move(item));
  }
  if (pool.items.empty()) return pool;

  if (rel_scorer) {
    std::vector<std::string> texts;
    texts.reserve(pool.items.size());
    for (const auto& it : pool.items) texts.push_back(it.text);
    auto rel = score_checked(*rel_scorer, h.text, texts);
    for (std::size_t i = 0; i < rel.size(); ++i) pool.items[i].rel = rel[i];
    std::stable_sort(pool.items.begin(), pool.items.end(), [](const KnowledgeItem& a, const KnowledgeItem& b) {
      if (a.rel != b.rel) return a.rel > b.rel;
      return a.sent_id < b.sent_id;
    });
    pool.rel_max = rel_scorer->range().hi;
  } else {
    double mx = 0.0;
    for (const auto& it : pool.items) mx = std::max(mx, it.rel);
    pool.rel_max = mx > 0.0 ? mx : 1.0;
  }
  return pool;
}

std::vector<KnowledgeItem> information_gain_rerank(std::span<const KnowledgeItem> pool, const PoolSimilarity& sim,
                                                   std::size_t top_k, double rel_max) {
  return greedy_select(pool, top_k, rel_max,
                       [&](const std::vector<std::size_t>& order, const std::vector<bool>& taken,
                           std::vector<double>& red) {
                         const std::size_t last = order.back();
                         for (std::size_t c = 0; c < red.size(); ++c) {
                           if (!taken[c]) red[c] = std::max(red[c], checked_sim(sim, last, c));
                         }
                       });
}

std::vector<KnowledgeItem> information_gain_rerank_full(std::span<const KnowledgeItem> pool,
                                                        const PoolSimilarity& sim, std::size_t top_k,
                                                        double rel_max) {
  return greedy_select(pool, top_k, rel_max,
                       [&](const std::vector<std::size_t>& order, const std::vector<bool>& taken,
                           std::vector<double>& red) {
                         for (std::size_t c = 0; c < red.size(); ++c) {
                           if (taken[c]) continue;
                           double r = 0.0;
                           for (auto s : order) r = std::max(r, checked_sim(sim, s, c));
                           red[c] = r;
                         }
                       });
}

ScorerPoolSimilarity::ScorerPoolSimilarity(std::span<const KnowledgeItem> pool, const SimilarityScorer& scorer)
    : scorer_(scorer), rows_(pool.size()) {
  texts_.reserve(pool.size());
  for (const auto& it : pool) texts_.push_back(it.text);
}

double ScorerPoolSimilarity::operator()(std::size_t i, std::size_t j) const {
  auto& row = rows_.at(i);
  if (!row) {
    auto scores = score_checked(scorer_, texts_[i], texts_);
    const double hi = scorer_.range().hi;
    for (auto& s : scores) s = std::clamp(s / hi, 0.0, 1.0);
    row = std::move(scores);
  }
  return (*row).at(j);
}

}  // namespace abductir
