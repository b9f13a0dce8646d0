#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "abductir/abduction.hpp"
#include "abductir/answering.hpp"
#include "abductir/corpus_io.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/hypothesis.hpp"
#include "abductir/missing_knowledge.hpp"

namespace abductir {

/// Per-question bundles of the four per-option results, in option order.
using FactLists = std::array<std::vector<ScoredFact>, kOptionCount>;
using QuerySet = std::array<AbducedQuery, kOptionCount>;
using PoolSet = std::array<CandidatePool, kOptionCount>;
using KnowledgeLists = std::array<std::vector<KnowledgeItem>, kOptionCount>;
using PassageSet = std::array<Passage, kOptionCount>;

void write_jsonl(const std::string& path, std::span<const json> rows);
/// Line-numbered DataError on malformed lines; blank lines skipped.
std::vector<json> read_jsonl(const std::string& path);

json hypothesis_to_json(const Hypothesis& h);
json facts_to_json(const std::string& question_id, char label, std::span<const ScoredFact> facts);
json query_to_json(const AbducedQuery& q);
json pool_to_json(const std::string& question_id, char label, const CandidatePool& pool);
json knowledge_to_json(const std::string& question_id, char label, std::span<const KnowledgeItem> items);
json scores_to_json(const std::string& question_id, const ScoreMatrix& m, const PassageSet& passages,
                    const Scores4& totals);
json prediction_to_json(const Prediction& p);

/// Readers group per-option rows under the given questions and fail with
/// DataError when a (question, option) row is missing or duplicated.
std::vector<HypothesisSet> load_hypotheses(const std::string& path, std::span<const Question> questions,
                                           const TokenizerConfig& tokenizer);
std::vector<FactLists> load_fact_lists(const std::string& path, std::span<const Question> questions);
std::vector<QuerySet> load_queries(const std::string& path, std::span<const Question> questions);
std::vector<PoolSet> load_pools(const std::string& path, std::span<const Question> questions);
std::vector<KnowledgeLists> load_knowledge_lists(const std::string& path, std::span<const Question> questions);
std::vector<Prediction> load_predictions(const std::string& path);

void save_hypotheses(const std::string& path, std::span<const HypothesisSet> sets);
void save_fact_lists(const std::string& path, std::span<const Question> questions, std::span<const FactLists> lists);
void save_queries(const std::string& path, std::span<const QuerySet> sets);
void save_pools(const std::string& path, std::span<const Question> questions, std::span<const PoolSet> pools);
void save_knowledge_lists(const std::string& path, std::span<const Question> questions,
                          std::span<const KnowledgeLists> lists);
void save_predictions(const std::string& path, std::span<const Prediction> predictions);

}  // namespace abductir
