#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "abductir/corpus_io.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/missing_knowledge.hpp"
#include "abductir/scorers.hpp"

namespace abductir {

struct Passage {
  std::string question_id;
  char option_label = 'A';
  std::string text;
  std::size_t token_count = 0;
  std::size_t sentence_count = 0;
  std::size_t max_tokens = 512;
};

/// Top n_facts facts then top n_knowledge knowledge sentences, each stripped
/// of terminal punctuation, joined with ". " and closed with ".". Whole
/// sentences are dropped from the tail until the token count (stopwords
/// included) is at most max_tokens. Throws std::invalid_argument when both
/// counts are zero.
Passage assemble_passage(std::span<const ScoredFact> facts, std::span<const KnowledgeItem> knowledge,
                         std::size_t n_facts, std::size_t n_knowledge, std::size_t max_tokens,
                         const TokenizerConfig& tokenizer = {});

using Scores4 = std::array<double, kOptionCount>;
using Mask4 = std::array<int, kOptionCount>;
/// m[j][i] = score(P_j, Q, A_i): row = passage, column = option.
using ScoreMatrix = std::array<Scores4, kOptionCount>;

/// Pr[i] = Σ_j m[j][i].
Scores4 sum_score(const ScoreMatrix& m);
/// 1 for the two largest scores (ties: lower index), 0 otherwise.
Mask4 passage_selection(const Scores4& pr_f);
/// Pr[i] = δ_i · Σ_k δ_k m[k][i]: options outside the selection score 0 and
/// only selected passages contribute.
Scores4 masked_sum_score(const ScoreMatrix& m, const Mask4& delta);
/// Index of the maximum; ties go to the lowest index. Entries with mask 0
/// are skipped when a mask is given.
std::size_t argmax_lowest(const Scores4& v, const Mask4* mask = nullptr);

struct WeightedResult {
  Scores4 weighted{};
  std::size_t chosen = 0;
};

/// wPr = Pr_F ⊙ Pr_FK; chosen = argmax over options with δ = 1.
WeightedResult weighted_score(const Scores4& pr_f, const Scores4& pr_fk, const Mask4& delta);

/// Scores the passage rows with mask 1 (all rows without a mask) against
/// every option. Unscored rows stay 0. Throws ScorerError on negative or
/// non-finite scores.
ScoreMatrix score_matrix(const std::array<Passage, kOptionCount>& passages, const Question& q,
                         const AnswerScorer& scorer, const Mask4* rows = nullptr);

enum class AnswerMode {
  facts,      // argmax of the facts-only sum score
  sum,        // argmax of the facts+knowledge sum score
  selection,  // facts+knowledge sum over the top-two passages
  weighted,   // Pr_F ⊙ Pr_FK over all passages
  both,       // passage selection, then weighted scoring
};

std::string to_string(AnswerMode mode);
/// Throws ConfigError on unknown names.
AnswerMode parse_answer_mode(std::string_view name);

struct Prediction {
  std::string question_id;
  char chosen_label = 'A';
  Scores4 sum_scores{};       // Pr(F, Q, A_i)
  Scores4 knowledge_scores{}; // Pr(F ∪ K, Q, A_i), masked in selection modes
  Mask4 selected_mask{1, 1, 1, 1};
  Scores4 weighted_scores{};  // final score vector the choice is taken from
};

struct AnswerOutcome {
  ScoreMatrix facts_matrix{};
  std::optional<ScoreMatrix> knowledge_matrix;
  Prediction prediction;
};

/// Round one scores the facts-only passages; round two (skipped when
/// `with_knowledge` is null) scores the facts+knowledge passages.
AnswerOutcome predict(const Question& q, const std::array<Passage, kOptionCount>& facts_only,
                      const std::array<Passage, kOptionCount>* with_knowledge, const AnswerScorer& scorer,
                      AnswerMode mode);

}  // namespace abductir
