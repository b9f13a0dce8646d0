#include "abductir/inverted_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "abductir/errors.hpp"

namespace abductir {

namespace {

constexpr char kCacheMagic[8] = {'A', 'B', 'I', 'R', 'I', 'D', 'X', '\0'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw DataError("truncated index cache: " + path);
  }
  return value;
}

std::string read_string(std::istream& in, const std::string& path) {
  auto len = read_pod<std::uint32_t>(in, path);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) throw DataError("truncated index cache: " + path);
  return s;
}

}  // namespace

std::string to_string(ScoringMode mode) {
  return mode == ScoringMode::bm25 ? "bm25" : "tfidf";
}

ScoringMode parse_scoring_mode(std::string_view name) {
  if (name == "tfidf" || name == "tfidf-cosine") return ScoringMode::tfidf_cosine;
  if (name == "bm25") return ScoringMode::bm25;
  throw ConfigError("unknown index scoring mode: " + std::string(name));
}

std::vector<ScoredDoc> top_n_dense(std::span<const double> scores, std::size_t n) {
  std::vector<ScoredDoc> all;
  all.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) all.push_back({i, scores[i]});
  n = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), ranks_before);
  all.resize(n);
  return all;
}

InvertedIndex InvertedIndex::build(std::span<const std::string> corpus, IndexMode mode,
                                   TokenizerConfig tokenizer) {
  if (corpus.empty()) throw DataError("cannot build an index over an empty corpus");
  InvertedIndex index;
  index.mode_ = mode;
  tokenizer.remove_stopwords = true;
  index.tokenizer_ = std::move(tokenizer);
  index.doc_lengths_.reserve(corpus.size());

  for (std::size_t doc = 0; doc < corpus.size(); ++doc) {
    auto toks = index.tokens(corpus[doc]);
    std::map<std::string, std::uint32_t> counts;
    for (auto& t : toks) ++counts[t];
    for (auto& [term, tf] : counts) {
      index.terms_[term].postings.push_back({static_cast<std::uint32_t>(doc), tf});
    }
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(toks.size()));
  }
  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  const double n = static_cast<double>(doc_count());
  std::vector<std::vector<SparseVector::Entry>> doc_entries(doc_count());
  for (auto& [term, entry] : terms_) {
    entry.idf = std::log((n + 1.0) / (static_cast<double>(entry.postings.size()) + 1.0)) + 1.0;
    for (const auto& p : entry.postings) {
      doc_entries[p.doc].emplace_back(term, static_cast<double>(p.tf) * entry.idf);
    }
  }
  doc_vectors_.clear();
  doc_vectors_.reserve(doc_count());
  for (auto& e : doc_entries) doc_vectors_.emplace_back(std::move(e));

  std::uint64_t total = 0;
  for (auto len : doc_lengths_) total += len;
  avg_doc_length_ = static_cast<double>(total) / n;
}

const InvertedIndex::TermEntry* InvertedIndex::find(std::string_view term) const {
  auto it = terms_.find(std::string(term));
  return it == terms_.end() ? nullptr : &it->second;
}

std::size_t InvertedIndex::df(std::string_view term) const {
  const auto* e = find(term);
  return e ? e->postings.size() : 0;
}

double InvertedIndex::idf(std::string_view term) const {
  const auto* e = find(term);
  return e ? e->idf : 0.0;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  const auto* e = find(term);
  if (!e) return {};
  return e->postings;
}

std::vector<std::string> InvertedIndex::tokens(std::string_view text) const {
  return tokenize(text, tokenizer_);
}

SparseVector InvertedIndex::vectorize(std::span<const std::string> tokens) const {
  std::map<std::string_view, std::uint32_t> counts;
  for (const auto& t : tokens) ++counts[t];
  std::vector<SparseVector::Entry> entries;
  for (const auto& [term, count] : counts) {
    if (const auto* e = find(term)) entries.emplace_back(std::string(term), count * e->idf);
  }
  return SparseVector(std::move(entries));
}

std::vector<double> InvertedIndex::accumulate(std::span<const std::string> query_tokens,
                                              std::vector<char>* touched) const {
  std::vector<double> acc(doc_count(), 0.0);
  if (touched) touched->assign(doc_count(), 0);

  // Unique query terms with their counts, in sorted order so that the
  // per-document summation order never depends on document order.
  std::map<std::string_view, std::uint32_t> qtf;
  for (const auto& t : query_tokens) ++qtf[t];

  if (mode_.kind == ScoringMode::tfidf_cosine) {
    double q_sq = 0.0;
    for (const auto& [term, count] : qtf) {
      const auto* e = find(term);
      if (!e) continue;
      const double qw = count * e->idf;
      q_sq += qw * qw;
      for (const auto& p : e->postings) {
        acc[p.doc] += qw * (p.tf * e->idf);
        if (touched) (*touched)[p.doc] = 1;
      }
    }
    const double q_norm = std::sqrt(q_sq);
    for (std::size_t d = 0; d < acc.size(); ++d) {
      if (acc[d] == 0.0) continue;
      acc[d] = std::min(1.0, acc[d] / (q_norm * doc_vectors_[d].norm()));
    }
  } else {
    const double k1 = mode_.k1;
    const double b = mode_.b;
    for (const auto& [term, count] : qtf) {
      const auto* e = find(term);
      if (!e) continue;
      for (const auto& p : e->postings) {
        const double tf = p.tf;
        const double norm = k1 * (1.0 - b + b * doc_lengths_[p.doc] / avg_doc_length_);
        acc[p.doc] += count * e->idf * (tf * (k1 + 1.0)) / (tf + norm);
        if (touched) (*touched)[p.doc] = 1;
      }
    }
  }
  return acc;
}

std::vector<double> InvertedIndex::score_all(std::span<const std::string> query_tokens) const {
  return accumulate(query_tokens, nullptr);
}

std::vector<ScoredDoc> InvertedIndex::query(std::span<const std::string> query_tokens,
                                            std::size_t top_n) const {
  if (top_n == 0) throw std::invalid_argument("query top_n must be >= 1");
  std::vector<char> touched;
  auto acc = accumulate(query_tokens, &touched);
  std::vector<ScoredDoc> hits;
  for (std::size_t d = 0; d < acc.size(); ++d) {
    if (touched[d]) hits.push_back({d, acc[d]});
  }
  auto n = std::min(top_n, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), ranks_before);
  hits.resize(n);
  return hits;
}

void InvertedIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write index cache: " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_pod(out, kCacheVersion);
  write_pod(out, static_cast<std::uint8_t>(mode_.kind));
  write_pod(out, mode_.k1);
  write_pod(out, mode_.b);
  write_pod(out, static_cast<std::uint8_t>(tokenizer_.lowercase));
  write_pod(out, static_cast<std::uint8_t>(tokenizer_.stem));

  const auto& stop = tokenizer_.stopword_list().words();
  write_pod(out, static_cast<std::uint32_t>(stop.size()));
  for (const auto& w : stop) write_string(out, w);

  write_pod(out, static_cast<std::uint64_t>(doc_lengths_.size()));
  for (auto len : doc_lengths_) write_pod(out, len);

  std::vector<const std::string*> sorted;
  sorted.reserve(terms_.size());
  for (const auto& [term, _] : terms_) sorted.push_back(&term);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return *a < *b; });

  write_pod(out, static_cast<std::uint64_t>(sorted.size()));
  for (const auto* term : sorted) {
    const auto& postings = terms_.at(*term).postings;
    write_string(out, *term);
    write_pod(out, static_cast<std::uint32_t>(postings.size()));
    for (const auto& p : postings) {
      write_pod(out, p.doc);
      write_pod(out, p.tf);
    }
  }
  if (!out) throw DataError("failed writing index cache: " + path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index cache: " + path);
  char magic[sizeof(kCacheMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw DataError("not an index cache file: " + path);
  }
  auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCacheVersion) {
    throw DataError("unsupported index cache version " + std::to_string(version) + " in " + path);
  }

  InvertedIndex index;
  auto kind = read_pod<std::uint8_t>(in, path);
  if (kind > 1) throw DataError("corrupt index cache (scoring mode): " + path);
  index.mode_.kind = static_cast<ScoringMode>(kind);
  index.mode_.k1 = read_pod<double>(in, path);
  index.mode_.b = read_pod<double>(in, path);
  index.tokenizer_.lowercase = read_pod<std::uint8_t>(in, path) != 0;
  index.tokenizer_.stem = read_pod<std::uint8_t>(in, path) != 0;
  index.tokenizer_.remove_stopwords = true;

  auto n_stop = read_pod<std::uint32_t>(in, path);
  std::vector<std::string> stop;
  stop.reserve(n_stop);
  for (std::uint32_t i = 0; i < n_stop; ++i) stop.push_back(read_string(in, path));
  index.tokenizer_.stopwords = std::make_shared<const StopwordList>(std::move(stop));

  auto n_docs = read_pod<std::uint64_t>(in, path);
  if (n_docs == 0) throw DataError("corrupt index cache (no documents): " + path);
  index.doc_lengths_.resize(n_docs);
  for (auto& len : index.doc_lengths_) len = read_pod<std::uint32_t>(in, path);

  auto n_terms = read_pod<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    auto term = read_string(in, path);
    auto n_postings = read_pod<std::uint32_t>(in, path);
    std::vector<Posting> postings(n_postings);
    for (auto& p : postings) {
      p.doc = read_pod<std::uint32_t>(in, path);
      p.tf = read_pod<std::uint32_t>(in, path);
      if (p.doc >= n_docs) throw DataError("corrupt index cache (doc id): " + path);
    }
    index.terms_[std::move(term)].postings = std::move(postings);
  }
  index.finalize();
  return index;
}

}  // namespace abductir
