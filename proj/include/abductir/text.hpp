#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace abductir {

/// Immutable stopword set. The default list ships as data/stopwords.txt and
/// is compiled into the library.
class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::vector<std::string> words);

  /// Parses one word per line; '#' comments and blank lines are ignored.
  static StopwordList parse(std::string_view content);
  static StopwordList load(const std::string& path);
  static const StopwordList& builtin();

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return ordered_; }

 private:
  std::vector<std::string> ordered_;
  std::unordered_set<std::string> words_;
};

struct TokenizerConfig {
  bool lowercase = true;
  bool remove_stopwords = true;
  /// Light plural suffix stripping. Off by default: "hawk" and "hawks" stay distinct.
  bool stem = false;
  /// nullptr means StopwordList::builtin().
  std::shared_ptr<const StopwordList> stopwords;

  const StopwordList& stopword_list() const {
    return stopwords ? *stopwords : StopwordList::builtin();
  }
};

/// Splits on non-alphanumeric boundaries. A hyphen between two word
/// characters stays inside the token ("red-tailed"). Bytes >= 0x80 count as
/// word characters so UTF-8 sequences are never split; only ASCII is
/// lowercased.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

/// Plural stripping used when TokenizerConfig::stem is set. Idempotent.
std::string strip_plural(std::string_view word);

/// Insertion-ordered set of unique tokens.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(const std::vector<std::string>& tokens);

  static TokenSet from_text(std::string_view text, const TokenizerConfig& config = {});

  /// Returns false if the token was already present.
  bool insert(std::string token);
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  /// Space-joined, in insertion order.
  std::string joined() const;

  friend bool operator==(const TokenSet& a, const TokenSet& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_set<std::string> index_;
};

/// Term -> weight map stored as a vector sorted by term. Zero weights are
/// never stored.
class SparseVector {
 public:
  using Entry = std::pair<std::string, double>;

  SparseVector() = default;
  /// Entries may be unsorted and may repeat a term (weights are summed).
  /// Throws std::invalid_argument on negative or non-finite weights.
  explicit SparseVector(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  double weight(std::string_view term) const;
  double norm() const noexcept { return norm_; }

 private:
  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

double dot(const SparseVector& a, const SparseVector& b);

/// Cosine similarity of non-negative vectors, clamped to [0, 1]. Zero when
/// either side is empty.
double cosine_sim(const SparseVector& a, const SparseVector& b);

/// Lowercase, ASCII punctuation removed, whitespace collapsed. Used for
/// gold-fact matching.
std::string normalize_for_match(std::string_view text);

std::string trim(std::string_view text);

}  // namespace abductir
