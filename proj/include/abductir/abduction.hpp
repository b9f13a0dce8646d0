#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abductir/corpus_io.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/hypothesis.hpp"
#include "abductir/text.hpp"

namespace abductir {

enum class AbductionModel { symmdiff, word_union, bow, generated };

std::string to_string(AbductionModel model);
/// "symmdiff", "union", "bow", "generated". Throws ConfigError otherwise.
AbductionModel parse_abduction_model(std::string_view name);

struct AbducedQuery {
  std::string question_id;
  char option_label = 'A';
  AbductionModel model = AbductionModel::symmdiff;
  TokenSet tokens;
  /// Space-joined tokens, or the chosen sentence for the generated model.
  std::string query_text;
};

/// (H ∪ F) \ (H ∩ F): H-only tokens in H order, then F-only tokens in F order.
AbducedQuery symmetric_difference_query(const TokenSet& h, const TokenSet& f);
/// H ∪ F: H tokens in order, then F tokens not in H.
AbducedQuery word_union_query(const TokenSet& h, const TokenSet& f);

/// P(word belongs to the missing knowledge | context). Implementations must be
/// deterministic and thread-safe.
class WordProbProvider {
 public:
  virtual ~WordProbProvider() = default;
  virtual std::string name() const = 0;
  virtual double prob(std::string_view word, std::span<const std::string> context) const = 0;
};

class ConstantWordProb final : public WordProbProvider {
 public:
  explicit ConstantWordProb(double p) : p_(p) {}
  std::string name() const override { return "constant"; }
  double prob(std::string_view, std::span<const std::string>) const override { return p_; }

 private:
  double p_;
};

/// Context-free word -> probability table with a fallback for unseen words.
class TableWordProb final : public WordProbProvider {
 public:
  TableWordProb(std::unordered_map<std::string, double> table, double fallback);

  std::string name() const override { return "table"; }
  double prob(std::string_view word, std::span<const std::string> context) const override;

  double fallback() const noexcept { return fallback_; }
  const std::unordered_map<std::string, double>& table() const noexcept { return table_; }

  /// "word<TAB>prob" lines; the reserved word "<default>" sets the fallback
  /// (0.5 when absent). Throws DataError on values outside [0, 1].
  static TableWordProb load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::unordered_map<std::string, double> table_;
  double fallback_;
};

/// {w ∈ H ∪ F : provider.prob(w, H ∪ F) > theta}, in union order. Throws
/// ConfigError if theta is outside [0, 1] and ScorerError if the provider
/// returns a value outside [0, 1].
AbducedQuery bag_of_words_query(const TokenSet& h, const TokenSet& f, const WordProbProvider& provider,
                                double theta);

/// Inputs for one question when building bag-of-words training data.
struct BowSource {
  std::string question_id;
  TokenSet hypothesis;      // correct option's hypothesis tokens
  TokenSet facts;           // tokens of the facts retrieved for it
  TokenSet gold_knowledge;  // tokens of the gold missing knowledge
};

struct BowTrainingExample {
  std::string question_id;
  std::string word;
  std::vector<std::string> context_tokens;
  bool positive = false;

  friend bool operator==(const BowTrainingExample&, const BowTrainingExample&) = default;
};

struct BowDataOptions {
  double sim_threshold = 0.6;
  std::uint64_t seed = 0;
};

/// Labels every word of H ∪ F: positive iff it is in the gold knowledge or
/// its word vector has cosine >= sim_threshold with some gold word's vector.
/// Words without a vector are negative unless verbatim in the gold set.
/// Questions with empty gold knowledge are skipped. The larger class is
/// downsampled (seeded) so both classes have equal size; the survivors keep
/// input order. Throws DataError if no source carries gold knowledge.
std::vector<BowTrainingExample> build_bow_training_data(std::span<const BowSource> sources,
                                                        const EmbeddingTable* wordvec,
                                                        const BowDataOptions& options);

/// question_id TAB word TAB 1|0 TAB space-joined context
void save_bow_examples(const std::string& path, std::span<const BowTrainingExample> examples);
std::vector<BowTrainingExample> load_bow_examples(const std::string& path);

/// Smoothed per-word positive rate: (pos + alpha * prior) / (seen + alpha),
/// prior = overall positive rate; unseen words get the prior.
TableWordProb fit_word_probs(std::span<const BowTrainingExample> examples, double alpha = 1.0);

struct GeneratedChoice {
  std::size_t index = 0;
  std::string text;
  std::size_t overlap = 0;  // |(H ∪ F) ∩ tokens(candidate)|
  double score = 0.0;       // overlap / |K̂|, or overlap when K̂ is not given
};

/// Picks the candidate with the largest overlap with H ∪ F; first wins ties.
/// Token sets must keep stopwords. With `gold_knowledge` the score is divided
/// by its size (DataError if empty); the argmax does not depend on it.
/// Throws DataError on an empty candidate list.
GeneratedChoice select_generated_knowledge(std::span<const std::string> candidates, const TokenSet& h,
                                           const TokenSet& f, const TokenSet* gold_knowledge,
                                           const TokenizerConfig& tokenizer);

/// Σ overlap / Σ |K̂| over a collection of selections.
struct OverlapTally {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  void add(std::size_t overlap, std::size_t gold_size) {
    numerator += overlap;
    denominator += gold_size;
  }
  double value() const { return denominator == 0 ? 0.0 : double(numerator) / double(denominator); }
};

/// Candidate sentences keyed by (question_id, option_label).
using GeneratedCandidates = std::map<std::pair<std::string, char>, std::vector<std::string>>;

/// One {"question_id", "option_label", "candidates": [...]} object per line.
GeneratedCandidates load_generated_candidates(const std::string& path);

/// Union of the token sets of the first `count` facts, in rank order.
TokenSet fact_tokens(std::span<const ScoredFact> facts, std::size_t count, const TokenizerConfig& tokenizer);

struct AbductionSettings {
  AbductionModel model = AbductionModel::symmdiff;
  std::size_t abduce_facts = 1;
  double theta = 0.4;
  const WordProbProvider* provider = nullptr;             // bow
  const GeneratedCandidates* candidates = nullptr;        // generated
  TokenizerConfig tokenizer;
};

/// Runs the configured model for one (question, option). Throws ConfigError
/// when the model's input (provider, candidates) is missing and DataError
/// when no candidates exist for the pair.
AbducedQuery abduce(const Question& q, const Hypothesis& h, std::span<const ScoredFact> facts,
                    const AbductionSettings& settings);

}  // namespace abductir
