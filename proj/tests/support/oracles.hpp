#pragma once

// Independent reference implementations and random generators shared by the
// unit and acceptance tests. Nothing here calls into the code it checks
// except tokenize(), which the oracles use as a given.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abductir/answering.hpp"
#include "abductir/corpus_io.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/missing_knowledge.hpp"
#include "abductir/stage_io.hpp"
#include "abductir/text.hpp"

namespace oracle {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t between(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  /// Value from a coarse grid so that ties actually happen.
  double grid(double lo, double hi, int steps) { return lo + (hi - lo) * double(below(steps + 1)) / steps; }

  std::string word(std::size_t vocab) { return "w" + std::to_string(below(vocab)); }

  abductir::TokenSet token_set(std::size_t vocab, std::size_t max_len) {
    abductir::TokenSet s;
    const std::size_t n = below(max_len + 1);
    for (std::size_t i = 0; i < n; ++i) s.insert(word(vocab));
    return s;
  }

  std::string sentence(std::size_t vocab, std::size_t min_len, std::size_t max_len) {
    std::string out;
    const std::size_t n = between(min_len, max_len);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += word(vocab);
    }
    return out;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline std::set<std::string> as_set(const abductir::TokenSet& s) { return {s.begin(), s.end()}; }

inline std::set<std::string> set_union(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline std::set<std::string> set_intersection(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out;
  for (const auto& x : a) {
    if (b.count(x)) out.insert(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval scores computed straight from the definitions, one document at a
// time.

struct BruteHit {
  std::size_t doc;
  double score;
};

inline std::vector<BruteHit> brute_force_rank(const std::vector<std::string>& corpus,
                                              const std::vector<std::string>& query_tokens, bool bm25,
                                              double k1 = 1.2, double b = 0.75,
                                              const abductir::TokenizerConfig& tok = {}) {
  abductir::TokenizerConfig t = tok;
  t.remove_stopwords = true;
  const double n = double(corpus.size());
  std::vector<std::map<std::string, double>> tf(corpus.size());
  std::vector<double> len(corpus.size());
  std::map<std::string, double> df;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto toks = abductir::tokenize(corpus[d], t);
    len[d] = double(toks.size());
    for (const auto& w : toks) tf[d][w] += 1.0;
    for (const auto& [w, c] : tf[d]) df[w] += 1.0;
  }
  const double avg = std::accumulate(len.begin(), len.end(), 0.0) / n;
  auto idf = [&](const std::string& w) { return std::log((n + 1.0) / (df[w] + 1.0)) + 1.0; };

  std::map<std::string, double> qtf;
  for (const auto& w : query_tokens) {
    if (df.count(w)) qtf[w] += 1.0;
  }

  std::vector<BruteHit> hits;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    bool shares = false;
    for (const auto& [w, c] : qtf) shares = shares || tf[d].count(w);
    if (!shares) continue;
    double score = 0.0;
    if (bm25) {
      for (const auto& [w, c] : qtf) {
        auto it = tf[d].find(w);
        if (it == tf[d].end()) continue;
        const double f = it->second;
        score += c * idf(w) * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * len[d] / avg));
      }
    } else {
      double qq = 0.0, dd = 0.0, qd = 0.0;
      for (const auto& [w, c] : qtf) qq += (c * idf(w)) * (c * idf(w));
      for (const auto& [w, f] : tf[d]) dd += (f * idf(w)) * (f * idf(w));
      for (const auto& [w, c] : qtf) {
        auto it = tf[d].find(w);
        if (it != tf[d].end()) qd += (c * idf(w)) * (it->second * idf(w));
      }
      score = std::min(1.0, qd / (std::sqrt(qq) * std::sqrt(dd)));
    }
    hits.push_back({d, score});
  }
  std::sort(hits.begin(), hits.end(), [](const BruteHit& a, const BruteHit& c) {
    if (a.score != c.score) return a.score > c.score;
    return a.doc < c.doc;
  });
  return hits;
}

// ---------------------------------------------------------------------------
// Re-ranking by exhaustive search: the reranked list must be the unique
// ordering in which every pick beats every remaining candidate, with
// redundancy recomputed from scratch against all earlier picks.

struct RerankInstance {
  std::vector<abductir::KnowledgeItem> pool;
  std::vector<std::vector<double>> sim;  // sim[selected][candidate]
  double rel_max = 1.0;
};

inline RerankInstance random_rerank_instance(Gen& g, std::size_t n) {
  RerankInstance inst;
  inst.rel_max = g.coin() ? 1.0 : 5.0;
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = g.below(1000);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  while (ids.size() < n) ids.push_back(ids.back() + 1);
  std::shuffle(ids.begin(), ids.end(), g.rng());
  for (std::size_t i = 0; i < n; ++i) {
    abductir::KnowledgeItem it;
    it.sent_id = ids[i];
    it.text = "s" + std::to_string(ids[i]);
    it.rel = g.coin(0.3) ? g.grid(0.0, inst.rel_max, 4) : g.uniform(0.0, inst.rel_max);
    inst.pool.push_back(it);
  }
  inst.sim.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      inst.sim[i][j] = i == j ? 1.0 : (g.coin(0.3) ? g.grid(0.0, 1.0, 4) : g.uniform(0.0, 1.0));
    }
  }
  return inst;
}

inline double rank_value(const RerankInstance& inst, const std::vector<std::size_t>& chosen, std::size_t c) {
  const double rel = inst.pool[c].rel / inst.rel_max;
  if (chosen.empty()) return rel;
  double red = 0.0;
  for (auto s : chosen) red = std::max(red, inst.sim[s][c]);
  return (1.0 - red) * rel;
}

/// Every ordering of min(top_k, n) pool indices consistent with the selection
/// rule. A correct rule admits exactly one.
inline std::vector<std::vector<std::size_t>> exhaustive_rerank(const RerankInstance& inst, std::size_t top_k) {
  const std::size_t n = inst.pool.size();
  const std::size_t k = std::min(top_k, n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::vector<std::size_t>> valid;
  do {
    std::vector<std::size_t> prefix(perm.begin(), perm.begin() + std::ptrdiff_t(k));
    bool ok = true;
    for (std::size_t t = 0; t < k && ok; ++t) {
      std::vector<std::size_t> chosen(prefix.begin(), prefix.begin() + std::ptrdiff_t(t));
      const double mine = rank_value(inst, chosen, prefix[t]);
      for (std::size_t c = 0; c < n && ok; ++c) {
        if (std::find(chosen.begin(), chosen.end(), c) != chosen.end() || c == prefix[t]) continue;
        const double other = rank_value(inst, chosen, c);
        if (other > mine || (other == mine && inst.pool[c].sent_id < inst.pool[prefix[t]].sent_id)) ok = false;
      }
    }
    if (ok) valid.insert(prefix);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {valid.begin(), valid.end()};
}

// ---------------------------------------------------------------------------
// Answer scoring.

inline abductir::ScoreMatrix random_matrix(Gen& g) {
  abductir::ScoreMatrix m{};
  for (auto& row : m) {
    for (auto& v : row) v = g.coin(0.2) ? g.grid(0.0, 1.0, 2) : g.uniform(0.0, 1.0);
  }
  return m;
}

inline abductir::Scores4 naive_sum(const abductir::ScoreMatrix& m) {
  abductir::Scores4 out{0, 0, 0, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j) s += m[j][i];
    out[i] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation fixtures.

inline abductir::Question make_question(const std::string& id, char answer, const std::string& gold) {
  abductir::Question q;
  q.id = id;
  q.stem = "Question " + id + "?";
  for (std::size_t i = 0; i < 4; ++i) {
    q.options[i] = {abductir::kOptionLabels[i], "option " + std::string(1, char('a' + i)) + " of " + id};
  }
  q.answer_key = answer;
  q.gold_fact = gold;
  return q;
}

inline std::vector<abductir::ScoredFact> fact_list(const std::string& qid, char label,
                                                   const std::vector<std::string>& texts) {
  std::vector<abductir::ScoredFact> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({qid, label, i, texts[i], 1.0 - 0.1 * double(i)});
  }
  return out;
}

struct MetricsFixture {
  std::vector<abductir::Question> questions;
  std::vector<abductir::FactLists> facts;
  std::vector<abductir::Prediction> predictions;
  std::size_t n_facts = 3;
  std::size_t expected_any = 0;
  std::size_t expected_correct = 0;
  std::size_t expected_right_answers = 0;
};

/// Ten questions. The gold fact (written with different case and
/// punctuation) is planted in the top three of the correct option for
/// q1-q4, of a wrong option only for q5-q6, at rank four (outside N = 3) for
/// q7, and nowhere for q8-q10. Predictions are right for q1, q3, q5, q7, q9.
inline MetricsFixture ten_question_fixture() {
  MetricsFixture fx;
  const char answers[10] = {'A', 'B', 'C', 'D', 'A', 'B', 'C', 'D', 'A', 'B'};
  const char predicted[10] = {'A', 'C', 'C', 'A', 'A', 'C', 'C', 'A', 'A', 'C'};
  for (int n = 1; n <= 10; ++n) {
    const std::string id = "m" + std::to_string(n);
    const std::string gold = "the gold fact of " + id;
    auto q = make_question(id, answers[n - 1], gold);
    abductir::FactLists lists;
    for (std::size_t o = 0; o < 4; ++o) {
      std::vector<std::string> texts = {"filler one " + id, "filler two " + id, "filler three " + id,
                                        "filler four " + id};
      const bool correct_option = o == q.answer_index();
      if (n <= 4 && correct_option) texts[std::size_t(n) % 3] = "The Gold fact of " + id + ".";
      if ((n == 5 || n == 6) && o == (q.answer_index() + 1) % 4) texts[1] = "  the GOLD fact, of " + id;
      if (n == 7 && correct_option) texts[3] = gold;
      lists[o] = fact_list(id, abductir::kOptionLabels[o], texts);
    }
    abductir::Prediction p;
    p.question_id = id;
    p.chosen_label = predicted[n - 1];
    fx.questions.push_back(q);
    fx.facts.push_back(lists);
    fx.predictions.push_back(p);
  }
  fx.expected_any = 6;
  fx.expected_correct = 4;
  fx.expected_right_answers = 5;
  return fx;
}

/// Random questions with gold facts sprinkled over random option lists.
inline MetricsFixture random_metrics_fixture(Gen& g) {
  MetricsFixture fx;
  fx.n_facts = g.between(1, 4);
  const std::size_t nq = g.between(1, 12);
  for (std::size_t n = 0; n < nq; ++n) {
    const std::string id = "r" + std::to_string(n);
    const std::string gold = "gold " + id;
    auto q = make_question(id, abductir::kOptionLabels[g.below(4)], gold);
    abductir::FactLists lists;
    for (std::size_t o = 0; o < 4; ++o) {
      std::vector<std::string> texts;
      const std::size_t len = g.between(0, 5);
      for (std::size_t k = 0; k < len; ++k) texts.push_back(g.coin(0.15) ? gold : "other " + g.word(30));
      lists[o] = fact_list(id, abductir::kOptionLabels[o], texts);
    }
    abductir::Prediction p;
    p.question_id = id;
    p.chosen_label = abductir::kOptionLabels[g.below(4)];
    fx.questions.push_back(q);
    fx.facts.push_back(lists);
    fx.predictions.push_back(p);
  }
  return fx;
}

// ---------------------------------------------------------------------------
// Files.

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("abductir-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return child.empty() ? path_.string() : (path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
