#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "abductir/text.hpp"

namespace abductir {

enum class ScoringMode : std::uint8_t { tfidf_cosine = 0, bm25 = 1 };

struct IndexMode {
  ScoringMode kind = ScoringMode::tfidf_cosine;
  double k1 = 1.2;
  double b = 0.75;

  static IndexMode tfidf() { return {}; }
  static IndexMode bm25(double k1 = 1.2, double b = 0.75) { return {ScoringMode::bm25, k1, b}; }
};

std::string to_string(ScoringMode mode);
/// Accepts "tfidf" / "tfidf-cosine" and "bm25". Throws ConfigError otherwise.
ScoringMode parse_scoring_mode(std::string_view name);

struct Posting {
  std::uint32_t doc;
  std::uint32_t tf;
};

struct ScoredDoc {
  std::size_t doc_id;
  double score;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Orders by descending score, then ascending doc id.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

/// Exact top-n of a dense score vector under ranks_before. Keeps every
/// entry (including zeros); result length is min(n, scores.size()).
std::vector<ScoredDoc> top_n_dense(std::span<const double> scores, std::size_t n);

/// Term-at-a-time inverted index over a fixed corpus. Immutable after
/// build; concurrent queries are safe.
///
/// idf(t) = ln((N + 1) / (df(t) + 1)) + 1 for both scoring modes. In
/// tfidf_cosine mode documents and queries are raw-count x idf vectors and
/// the score is their cosine. In bm25 mode the score is the usual Okapi sum
/// with the same idf.
class InvertedIndex {
 public:
  static constexpr std::uint32_t kCacheVersion = 1;

  /// Stopwords are always removed regardless of `tokenizer.remove_stopwords`.
  /// Throws DataError on an empty corpus.
  static InvertedIndex build(std::span<const std::string> corpus, IndexMode mode = {},
                             TokenizerConfig tokenizer = {});

  std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }
  const IndexMode& mode() const noexcept { return mode_; }
  const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }

  /// 0 for out-of-vocabulary terms.
  std::size_t df(std::string_view term) const;
  /// 0 for out-of-vocabulary terms.
  double idf(std::string_view term) const;
  /// Sorted by doc id; empty span for out-of-vocabulary terms.
  std::span<const Posting> postings(std::string_view term) const;
  std::uint32_t doc_length(std::size_t doc) const { return doc_lengths_.at(doc); }
  double average_doc_length() const noexcept { return avg_doc_length_; }

  std::vector<std::string> tokens(std::string_view text) const;

  /// Count x idf vector; out-of-vocabulary tokens are dropped.
  SparseVector vectorize(std::span<const std::string> tokens) const;
  SparseVector vectorize_text(std::string_view text) const { return vectorize(tokens(text)); }
  const SparseVector& doc_vector(std::size_t doc) const { return doc_vectors_.at(doc); }

  /// Score of every document (0 for documents sharing no term with the query).
  std::vector<double> score_all(std::span<const std::string> query_tokens) const;

  /// Exact top-n among documents sharing at least one term with the query,
  /// descending score, ties by ascending doc id. Throws std::invalid_argument
  /// when top_n == 0.
  std::vector<ScoredDoc> query(std::span<const std::string> query_tokens, std::size_t top_n) const;

  void save(const std::string& path) const;
  /// Throws DataError on a bad magic, version mismatch or truncated file.
  static InvertedIndex load(const std::string& path);

 private:
  struct TermEntry {
    std::vector<Posting> postings;
    double idf = 0.0;
  };

  void finalize();
  std::vector<double> accumulate(std::span<const std::string> query_tokens,
                                 std::vector<char>* touched) const;
  const TermEntry* find(std::string_view term) const;

  IndexMode mode_;
  TokenizerConfig tokenizer_;
  std::unordered_map<std::string, TermEntry> terms_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<SparseVector> doc_vectors_;
  double avg_doc_length_ = 0.0;
};

}  // namespace abductir
