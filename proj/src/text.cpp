#include "abductir/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "abductir/errors.hpp"
#include "stopwords_data.hpp"

namespace abductir {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

}  // namespace

StopwordList::StopwordList(std::vector<std::string> words) {
  for (auto& w : words) {
    auto lw = lowered(w);
    if (lw.empty()) continue;
    if (words_.insert(lw).second) ordered_.push_back(std::move(lw));
  }
}

StopwordList StopwordList::parse(std::string_view content) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = trim(content.substr(pos, nl - pos));
    if (!line.empty() && line[0] != '#') words.push_back(std::move(line));
    pos = nl + 1;
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const StopwordList& StopwordList::builtin() {
  static const StopwordList list = parse(detail::kBuiltinStopwords);
  return list;
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

std::string strip_plural(std::string_view word) {
  std::string w(word);
  auto ends_with = [&](std::string_view suffix) {
    return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (w.size() <= 3) return w;
  if (w.size() >= 5 && ends_with("ies")) {
    w.resize(w.size() - 3);
    w += 'y';
  } else if (ends_with("sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    w.pop_back();
  }
  return w;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> out;
  const StopwordList* stop = config.remove_stopwords ? &config.stopword_list() : nullptr;

  auto emit = [&](std::string token) {
    if (token.empty()) return;
    if (config.lowercase) token = lowered(token);
    if (stop && stop->contains(config.lowercase ? token : lowered(token))) return;
    if (config.stem) {
      token = strip_plural(token);
      if (stop && stop->contains(config.lowercase ? token : lowered(token))) return;
    }
    out.push_back(std::move(token));
  };

  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(c));
    } else if (c == '-' && !current.empty() && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      current.push_back('-');
    } else {
      emit(std::move(current));
      current.clear();
    }
  }
  emit(std::move(current));
  return out;
}

TokenSet::TokenSet(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) insert(t);
}

TokenSet TokenSet::from_text(std::string_view text, const TokenizerConfig& config) {
  return TokenSet(tokenize(text, config));
}

bool TokenSet::insert(std::string token) {
  if (token.empty()) return false;
  if (!index_.insert(token).second) return false;
  tokens_.push_back(std::move(token));
  return true;
}

bool TokenSet::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

std::string TokenSet::joined() const {
  std::string out;
  for (const auto& t : tokens_) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

SparseVector::SparseVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& e : entries) {
    if (!std::isfinite(e.second) || e.second < 0.0) {
      throw std::invalid_argument("sparse vector weight must be finite and non-negative: " + e.first);
    }
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(std::move(e));
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
  double sq = 0.0;
  for (const auto& e : entries_) sq += e.second * e.second;
  norm_ = std::sqrt(sq);
}

double SparseVector::weight(std::string_view term) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const Entry& e, std::string_view t) { return e.first < t; });
  return (it != entries_.end() && it->first == term) ? it->second : 0.0;
}

double dot(const SparseVector& a, const SparseVector& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() && j < y.size()) {
    int cmp = x[i].first.compare(y[j].first);
    if (cmp == 0) {
      sum += x[i].second * y[j].second;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

double cosine_sim(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double c = dot(a, b) / (a.norm() * b.norm());
  return std::clamp(c, 0.0, 1.0);
}

std::string normalize_for_match(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    if (c < 0x80 && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += ascii_lower(ch);
  }
  return out;
}

std::string trim(std::string_view text) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

}  // namespace abductir
