#include "abductir/answering.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "abductir/errors.hpp"

namespace abductir {

namespace {

std::string strip_sentence(std::string_view s) {
  std::string out = trim(s);
  while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?' || out.back() == ' ')) {
    out.pop_back();
  }
  return out;
}

std::string join_passage(const std::vector<std::string>& sentences, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ". ";
    out += sentences[i];
  }
  if (count) out += '.';
  return out;
}

}  // namespace

Passage assemble_passage(std::span<const ScoredFact> facts, std::span<const KnowledgeItem> knowledge,
                         std::size_t n_facts, std::size_t n_knowledge, std::size_t max_tokens,
                         const TokenizerConfig& tokenizer) {
  if (n_facts == 0 && n_knowledge == 0) {
    throw std::invalid_argument("assemble_passage: n_facts and n_knowledge are both zero");
  }
  Passage p;
  p.max_tokens = max_tokens;
  if (!facts.empty()) {
    p.question_id = facts.front().question_id;
    p.option_label = facts.front().option_label;
  } else if (!knowledge.empty()) {
    p.question_id = knowledge.front().question_id;
    p.option_label = knowledge.front().option_label;
  }

  std::vector<std::string> sentences;
  for (std::size_t i = 0; i < std::min(n_facts, facts.size()); ++i) {
    if (auto s = strip_sentence(facts[i].text); !s.empty()) sentences.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < std::min(n_knowledge, knowledge.size()); ++i) {
    if (auto s = strip_sentence(knowledge[i].text); !s.empty()) sentences.push_back(std::move(s));
  }

  TokenizerConfig counting = tokenizer;
  counting.remove_stopwords = false;
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (const auto& s : sentences) {
    lengths.push_back(tokenize(s, counting).size());
    total += lengths.back();
  }
  std::size_t keep = sentences.size();
  while (keep > 0 && total > max_tokens) total -= lengths[--keep];

  p.text = join_passage(sentences, keep);
  p.token_count = total;
  p.sentence_count = keep;
  return p;
}

Scores4 sum_score(const ScoreMatrix& m) {
  Scores4 pr{};
  for (std::size_t j = 0; j < kOptionCount; ++j) {
    for (std::size_t i = 0; i < kOptionCount; ++i) pr[i] += m[j][i];
  }
  return pr;
}

Mask4 passage_selection(const Scores4& pr_f) {
  std::array<std::size_t, kOptionCount> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pr_f[a] > pr_f[b]; });
  Mask4 delta{};
  delta[idx[0]] = 1;
  delta[idx[1]] = 1;
  return delta;
}

Scores4 masked_sum_score(const ScoreMatrix& m, const Mask4& delta) {
  Scores4 pr{};
  for (std::size_t i = 0; i < kOptionCount; ++i) {
    if (!delta[i]) continue;
    for (std::size_t k = 0; k < kOptionCount; ++k) {
      if (delta[k]) pr[i] += m[k][i];
    }
  }
  return pr;
}

std::size_t argmax_lowest(const Scores4& v, const Mask4* mask) {
  std::size_t best = kOptionCount;
  for (std::size_t i = 0; i < kOptionCount; ++i) {
    if (mask && !(*mask)[i]) continue;
    if (best == kOptionCount || v[i] > v[best]) best = i;
  }
  if (best == kOptionCount) throw std::invalid_argument("argmax_lowest: mask selects nothing");
  return best;
}

WeightedResult weighted_score(const Scores4& pr_f, const Scores4& pr_fk, const Mask4& delta) {
  WeightedResult r;
  for (std::size_t i = 0; i < kOptionCount; ++i) r.weighted[i] = pr_f[i] * pr_fk[i];
  r.chosen = argmax_lowest(r.weighted, &delta);
  return r;
}

ScoreMatrix score_matrix(const std::array<Passage, kOptionCount>& passages, const Question& q,
                         const AnswerScorer& scorer, const Mask4* rows) {
  std::vector<AnswerTriple> triples;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t j = 0; j < kOptionCount; ++j) {
    if (rows && !(*rows)[j]) continue;
    for (std::size_t i = 0; i < kOptionCount; ++i) {
      triples.push_back({passages[j].text, q.stem, q.options[i].text});
      cells.emplace_back(j, i);
    }
  }
  ScoreMatrix m{};
  if (triples.empty()) return m;
  auto scores = scorer.score_batch(triples);
  if (scores.size() != triples.size()) {
    throw ScorerError(scorer.name() + " returned " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(triples.size()) + " passages");
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double v = scores[c];
    if (!std::isfinite(v) || v < 0.0) {
      throw ScorerError(scorer.name() + " returned invalid answer score " + std::to_string(v));
    }
    m[cells[c].first][cells[c].second] = v;
  }
  return m;
}

std::string to_string(AnswerMode mode) {
  switch (mode) {
    case AnswerMode::facts: return "facts";
    case AnswerMode::sum: return "sum";
    case AnswerMode::selection: return "selection";
    case AnswerMode::weighted: return "weighted";
    case AnswerMode::both: return "both";
  }
  return "both";
}

AnswerMode parse_answer_mode(std::string_view name) {
  if (name == "facts") return AnswerMode::facts;
  if (name == "sum") return AnswerMode::sum;
  if (name == "selection") return AnswerMode::selection;
  if (name == "weighted") return AnswerMode::weighted;
  if (name == "both") return AnswerMode::both;
  throw ConfigError("unknown answer mode '" + std::string(name) +
                    "' (expected facts, sum, selection, weighted or both)");
}

AnswerOutcome predict(const Question& q, const std::array<Passage, kOptionCount>& facts_only,
                      const std::array<Passage, kOptionCount>* with_knowledge, const AnswerScorer& scorer,
                      AnswerMode mode) {
  AnswerOutcome out;
  Prediction& p = out.prediction;
  p.question_id = q.id;
  out.facts_matrix = score_matrix(facts_only, q, scorer);
  p.sum_scores = sum_score(out.facts_matrix);

  if (mode == AnswerMode::facts || with_knowledge == nullptr) {
    p.weighted_scores = p.sum_scores;
    p.chosen_label = kOptionLabels[argmax_lowest(p.sum_scores)];
    return out;
  }

  const bool select = mode == AnswerMode::selection || mode == AnswerMode::both;
  p.selected_mask = select ? passage_selection(p.sum_scores) : Mask4{1, 1, 1, 1};
  out.knowledge_matrix = score_matrix(*with_knowledge, q, scorer, select ? &p.selected_mask : nullptr);
  p.knowledge_scores = masked_sum_score(*out.knowledge_matrix, p.selected_mask);

  std::size_t chosen = 0;
  if (mode == AnswerMode::weighted || mode == AnswerMode::both) {
    auto w = weighted_score(p.sum_scores, p.knowledge_scores, p.selected_mask);
    p.weighted_scores = w.weighted;
    chosen = w.chosen;
  } else {
    p.weighted_scores = p.knowledge_scores;
    chosen = argmax_lowest(p.knowledge_scores, &p.selected_mask);
  }
  p.chosen_label = kOptionLabels[chosen];
  return out;
}

}  // namespace abductir
