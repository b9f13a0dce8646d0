#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abductir/abduction.hpp"
#include "abductir/answering.hpp"
#include "abductir/corpus_io.hpp"
#include "abductir/inverted_index.hpp"
#include "abductir/scorers.hpp"
#include "abductir/stage_io.hpp"

namespace abductir {

struct PipelineConfig {
  // Inputs and outputs.
  std::string questions;
  std::string facts;
  std::string knowledge;
  std::string embeddings;       // sentence embeddings for "embedding" scorers
  std::string word_embeddings;  // word vectors for gen-bow-data
  std::string stopwords;        // empty: built-in list
  std::string word_probs;       // word -> probability table for the bow model
  std::string gen_candidates;   // generated sentences for the generated model
  std::string index_cache;      // knowledge index cache; built and written when missing
  std::string out_dir = "out";

  // Scorers: tfidf | embedding | remote (rel also accepts ir; answer: lexical | remote;
  // sts: lexical | embedding | remote).
  std::string fact_scorer = "tfidf";
  std::string rel_scorer = "tfidf";
  std::string sim_scorer = "tfidf";
  std::string answer_scorer = "lexical";
  std::string sts_scorer = "lexical";
  std::string index_mode = "tfidf";
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  bool stem = false;

  std::string scorer_url;
  std::string model_id = "default";
  std::size_t max_batch = 64;
  int timeout_ms = 30000;

  std::string abduction = "symmdiff";
  std::size_t abduce_facts = 1;
  double theta = 0.4;
  double sim_threshold = 0.6;
  std::size_t samples_per_q = 8;

  std::size_t fact_top_n = 10;
  std::size_t n_facts = 5;
  std::size_t n_knowledge = 10;
  std::size_t pool_m = 50;
  std::size_t top_k = 10;
  std::size_t max_tokens = 512;
  std::string answer_mode = "both";
  std::vector<std::size_t> grid_n = {1, 2, 3, 5, 7, 10};
  std::vector<std::size_t> grid_k = {0, 5, 10};

  std::uint64_t seed = 0;
  std::size_t parallelism = 1;

  /// Range checks independent of the file system. Throws ConfigError.
  void validate() const;
  TokenizerConfig tokenizer() const;
  std::string stage_path(const std::string& file) const;
};

/// Applies a JSON object onto `config`; unknown keys and wrong types are
/// ConfigErrors.
void apply_config_json(PipelineConfig& config, const json& object);
PipelineConfig load_config_file(const std::string& path);
json config_to_json(const PipelineConfig& config);

/// Applies one setting given as text (the form used by command-line flags).
/// `key` is the snake_case config key. Throws ConfigError.
void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value);
/// Every config key with its help text, in declaration order.
std::vector<std::pair<std::string, std::string>> config_keys();

/// Throws ConfigError naming the first path that does not exist.
void require_paths(std::initializer_list<std::pair<const char*, const std::string*>> paths);

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

/// Lazily built corpora, indexes and scorers for one configuration.
class PipelineResources {
 public:
  explicit PipelineResources(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const FactCorpus& facts();
  const KnowledgeCorpus& knowledge();
  std::shared_ptr<const InvertedIndex> knowledge_index();
  const SimilarityScorer& fact_scorer();
  /// nullptr when rel is the raw IR score.
  const SimilarityScorer* rel_scorer();
  const SimilarityScorer& sim_scorer();
  const SimilarityScorer& sts_scorer();
  const AnswerScorer& answer_scorer();
  const WordProbProvider* word_probs();
  const GeneratedCandidates* generated_candidates();

  /// Forces every resource the full pipeline needs, so later parallel stages
  /// only read.
  void prepare_all();

 private:
  std::shared_ptr<const EmbeddingTable> embeddings();
  std::shared_ptr<const SimilarityScorer> make_similarity(const std::string& kind, const std::string& role);
  BridgeClient make_client() const;

  PipelineConfig config_;
  std::optional<FactCorpus> facts_;
  std::optional<KnowledgeCorpus> knowledge_;
  std::shared_ptr<const InvertedIndex> fact_index_;
  std::shared_ptr<const InvertedIndex> knowledge_index_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::shared_ptr<const SimilarityScorer> fact_scorer_;
  std::shared_ptr<const SimilarityScorer> rel_scorer_;
  bool rel_resolved_ = false;
  std::shared_ptr<const SimilarityScorer> sim_scorer_;
  std::shared_ptr<const SimilarityScorer> sts_scorer_;
  std::shared_ptr<const AnswerScorer> answer_scorer_;
  std::unique_ptr<WordProbProvider> word_probs_;
  std::optional<GeneratedCandidates> candidates_;
};

// Stages. Each maps per-question inputs to per-question outputs in question
// order and wraps failures in StageError.
std::vector<HypothesisSet> stage_hypothesize(std::span<const Question> questions, PipelineResources& res);
std::vector<FactLists> stage_retrieve_facts(std::span<const HypothesisSet> hyps, PipelineResources& res,
                                            std::size_t top_n);
std::vector<QuerySet> stage_abduce(std::span<const Question> questions, std::span<const HypothesisSet> hyps,
                                   std::span<const FactLists> facts, PipelineResources& res);
std::vector<PoolSet> stage_retrieve_knowledge(std::span<const HypothesisSet> hyps, std::span<const QuerySet> queries,
                                              PipelineResources& res);
std::vector<KnowledgeLists> stage_rerank(std::span<const PoolSet> pools, PipelineResources& res, std::size_t top_k);
std::vector<AnswerOutcome> stage_answer(std::span<const Question> questions, std::span<const FactLists> facts,
                                        std::span<const KnowledgeLists> knowledge, PipelineResources& res,
                                        std::size_t n_facts, std::size_t n_knowledge,
                                        std::vector<PassageSet>* facts_passages = nullptr,
                                        std::vector<PassageSet>* knowledge_passages = nullptr);

/// Runs stage_answer and writes scores_f / scores_fk / predictions files.
std::vector<Prediction> answer_and_save(PipelineResources& res, std::span<const Question> questions,
                                        std::span<const FactLists> facts, std::span<const KnowledgeLists> knowledge);

/// Bag-of-words training inputs from the correct option of every question
/// that carries gold missing knowledge.
std::vector<BowSource> make_bow_sources(std::span<const Question> questions, std::span<const HypothesisSet> hyps,
                                        std::span<const FactLists> facts, std::size_t abduce_facts,
                                        const TokenizerConfig& tokenizer);

struct EvalReport {
  std::size_t n_facts = 0;
  std::size_t n_knowledge = 0;
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  /// Absent when no question has a gold fact.
  std::optional<std::size_t> any_passage_count;
  std::optional<std::size_t> correct_passage_count;

  json to_json() const;
};

/// Accuracy of `predictions` against the answer keys, plus the number of
/// questions whose gold fact (normalized exact match) is among the top
/// `n_facts` facts of any option / of the correct option. `facts` may be
/// empty to skip the passage counts. Throws DataError when the prediction
/// and question ids differ.
EvalReport compute_metrics(std::span<const Prediction> predictions, std::span<const Question> questions,
                           std::span<const FactLists> facts, std::size_t n_facts);

/// Appends a timestamped header line and one JSON row per report to
/// report.jsonl, and rewrites report.txt (timestamp line, then a table).
void write_reports(const std::string& out_dir, std::span<const EvalReport> reports, const std::string& label);
std::string render_report_table(std::span<const EvalReport> reports);

struct RunResult {
  std::vector<Prediction> predictions;
  EvalReport report;
};

/// Full pipeline; writes every stage file under config.out_dir.
RunResult run_pipeline(const PipelineConfig& config);
/// One report row per (N, K) in the grid, reusing retrievals and reranks.
std::vector<EvalReport> run_grid(const PipelineConfig& config);

}  // namespace abductir
