#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abductir/corpus_io.hpp"
#include "abductir/hypothesis.hpp"
#include "abductir/scorers.hpp"

namespace abductir {

struct ScoredFact {
  std::string question_id;
  char option_label = 'A';
  std::size_t fact_id = 0;
  std::string text;
  double rel = 0.0;

  friend bool operator==(const ScoredFact&, const ScoredFact&) = default;
};

/// Exact top-n facts for one hypothesis, descending rel, ties by ascending
/// fact id. Length is min(top_n, corpus size). Throws ScorerError if the
/// scorer returns anything outside its range.
std::vector<ScoredFact> retrieve_facts(const Hypothesis& h, const SimilarityScorer& scorer,
                                       const FactCorpus& corpus, std::size_t top_n);

struct StsTrainingPair {
  std::string hypothesis_text;
  std::string fact_text;
  double target = 0.0;

  friend bool operator==(const StsTrainingPair&, const StsTrainingPair&) = default;
};

struct StsPairOptions {
  std::size_t samples_per_q = 8;
  std::uint64_t seed = 0;
  TokenizerConfig tokenizer;
};

struct StsPairResult {
  std::vector<StsTrainingPair> pairs;
  /// Questions without a gold fact.
  std::size_t skipped = 0;
};

/// Per question with a gold fact: (hypothesis of the correct option, gold
/// fact, 5.0), then up to samples_per_q pairs with sampled non-gold facts
/// whose target is sts_scorer(gold fact, sampled fact). Sampling is without
/// replacement, round-robin over the five unit-width target buckets
/// [0,1) .. [4,5], each bucket shuffled with a per-question seed.
/// Throws ConfigError unless the scorer's range is [0, 5].
StsPairResult generate_sts_training_pairs(std::span<const Question> questions, const FactCorpus& corpus,
                                          const SimilarityScorer& sts_scorer, const StsPairOptions& options);

/// hypothesis TAB fact TAB target, one pair per line. Tabs and newlines
/// inside texts become spaces.
void save_sts_pairs(const std::string& path, std::span<const StsTrainingPair> pairs);
std::vector<StsTrainingPair> load_sts_pairs(const std::string& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace abductir
