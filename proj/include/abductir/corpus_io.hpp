#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace abductir {

using json = nlohmann::json;

inline constexpr std::size_t kOptionCount = 4;
inline constexpr std::array<char, kOptionCount> kOptionLabels = {'A', 'B', 'C', 'D'};

/// 0..3 for 'A'..'D'; throws std::out_of_range otherwise.
std::size_t option_index(char label);
inline std::string label_string(char label) { return std::string(1, label); }

struct Option {
  char label = 'A';
  std::string text;

  friend bool operator==(const Option&, const Option&) = default;
};

/// One multiple-choice item. Options are stored in label order A..D.
struct Question {
  std::string id;
  std::string stem;
  std::array<Option, kOptionCount> options;
  char answer_key = 'A';
  std::optional<std::string> gold_fact;
  std::optional<std::vector<std::string>> gold_missing_knowledge;

  std::size_t answer_index() const { return option_index(answer_key); }

  friend bool operator==(const Question&, const Question&) = default;
};

/// Parses one record in the dataset release format:
///   {"id", "question": {"stem", "choices": [{"label", "text"}]}, "answerKey"}
/// Optional gold data: "fact1" (or "gold_fact") and "gold_missing_knowledge"
/// (string or array of strings). Unknown fields are ignored. Throws
/// DataError on any invariant violation.
Question parse_question(const json& record);
json question_to_json(const Question& q);

/// One JSON object per line; blank lines skipped. Errors name the 1-based line.
std::vector<Question> load_questions(const std::string& path);
std::vector<Question> parse_questions(std::string_view content, const std::string& source = "<memory>");
void save_questions(const std::string& path, std::span<const Question> questions);

struct FactCorpusTag {};
struct KnowledgeCorpusTag {};

/// Ordered sentence list with dense ids 0..n-1. Never empty, no blank entries.
template <typename Tag>
class SentenceCorpus {
 public:
  SentenceCorpus() = default;
  /// Throws DataError if empty or if any entry is blank.
  explicit SentenceCorpus(std::vector<std::string> texts);

  std::size_t size() const noexcept { return texts_.size(); }
  bool empty() const noexcept { return texts_.empty(); }
  const std::string& text(std::size_t id) const { return texts_.at(id); }
  const std::vector<std::string>& texts() const noexcept { return texts_; }

  friend bool operator==(const SentenceCorpus&, const SentenceCorpus&) = default;

 private:
  std::vector<std::string> texts_;
};

using FactCorpus = SentenceCorpus<FactCorpusTag>;
using KnowledgeCorpus = SentenceCorpus<KnowledgeCorpusTag>;

/// One sentence per line; a line wrapped in double quotes is unquoted; blank
/// lines are skipped.
std::vector<std::string> parse_sentence_lines(std::string_view content);
FactCorpus load_facts(const std::string& path);
KnowledgeCorpus load_knowledge(const std::string& path);
/// Writes one sentence per line, unquoted.
void save_sentences(const std::string& path, std::span<const std::string> sentences);

/// Dense vectors keyed by exact text. All vectors share one dimension and
/// carry only finite components. Keys keep insertion order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  /// Throws DataError on duplicate key, dimension mismatch, empty vector,
  /// non-finite component, or a key containing a tab or newline.
  void add(std::string key, std::vector<float> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  bool contains(std::string_view key) const;
  const std::vector<float>* find(std::string_view key) const;
  /// Throws DataError naming the missing key.
  const std::vector<float>& at(std::string_view key) const;
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  /// "key<TAB>v1<TAB>...<TAB>vd" per line, shortest round-trip float text.
  void save_tsv(const std::string& path) const;
  /// "ABIREMB1" magic, u32 version, u32 dim, u64 count, then per entry
  /// u32 key length, key bytes, dim little-endian float32 values.
  void save_binary(const std::string& path) const;
  /// Detects the binary magic, otherwise parses TSV (components may be
  /// separated by tabs or spaces).
  static EmbeddingTable load(const std::string& path);
  static EmbeddingTable parse_tsv(std::string_view content, const std::string& source = "<memory>");

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.keys_ == b.keys_ && a.vectors_ == b.vectors_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> keys_;
  std::vector<std::vector<float>> vectors_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Cosine of two dense vectors of equal length; 0 if either has zero norm.
double dense_cosine(std::span<const float> a, std::span<const float> b);

std::string read_file(const std::string& path);

}  // namespace abductir
