#include "abductir/corpus_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "abductir/errors.hpp"
#include "abductir/text.hpp"

namespace abductir {

namespace {

constexpr char kEmbeddingMagic[8] = {'A', 'B', 'I', 'R', 'E', 'M', 'B', '1'};
constexpr std::uint32_t kEmbeddingVersion = 1;

std::string line_prefix(const std::string& source, std::size_t line) {
  return source + ": line " + std::to_string(line) + ": ";
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw DataError(where + "missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string()) throw DataError(where + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

char parse_label(const std::string& s, const std::string& where) {
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'D') {
    throw DataError(where + "option label must be one of A-D, got '" + s + "'");
  }
  return s[0];
}

std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::string format_float(float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::size_t option_index(char label) {
  if (label < 'A' || label > 'D') throw std::out_of_range(std::string("bad option label: ") + label);
  return static_cast<std::size_t>(label - 'A');
}

Question parse_question(const json& record) {
  if (!record.is_object()) throw DataError("question record must be a JSON object");
  Question q;
  q.id = require_string(record, "id", "");
  if (q.id.empty()) throw DataError("question id is empty");
  const std::string where = "question " + q.id + ": ";

  if (!record.contains("question") || !record.at("question").is_object()) {
    throw DataError(where + "missing object field 'question'");
  }
  const auto& body = record.at("question");
  q.stem = require_string(body, "stem", where);
  if (trim(q.stem).empty()) throw DataError(where + "stem is empty");

  if (!body.contains("choices") || !body.at("choices").is_array()) {
    throw DataError(where + "missing array field 'question.choices'");
  }
  const auto& choices = body.at("choices");
  if (choices.size() != kOptionCount) {
    throw DataError(where + "expected 4 options, got " + std::to_string(choices.size()));
  }
  std::array<bool, kOptionCount> seen{};
  for (const auto& c : choices) {
    char label = parse_label(require_string(c, "label", where), where);
    auto idx = option_index(label);
    if (seen[idx]) throw DataError(where + "duplicate option label " + label_string(label));
    seen[idx] = true;
    q.options[idx] = Option{label, require_string(c, "text", where)};
  }

  q.answer_key = parse_label(require_string(record, "answerKey", where), where);

  for (const char* key : {"gold_fact", "fact1"}) {
    if (record.contains(key) && record.at(key).is_string()) {
      q.gold_fact = record.at(key).get<std::string>();
      break;
    }
  }
  if (record.contains("gold_missing_knowledge")) {
    const auto& mk = record.at("gold_missing_knowledge");
    std::vector<std::string> items;
    if (mk.is_string()) {
      items.push_back(mk.get<std::string>());
    } else if (mk.is_array()) {
      for (const auto& s : mk) {
        if (!s.is_string()) throw DataError(where + "gold_missing_knowledge entries must be strings");
        items.push_back(s.get<std::string>());
      }
    } else if (!mk.is_null()) {
      throw DataError(where + "gold_missing_knowledge must be a string or an array");
    }
    q.gold_missing_knowledge = std::move(items);
  }
  return q;
}

json question_to_json(const Question& q) {
  json choices = json::array();
  for (const auto& o : q.options) choices.push_back({{"label", label_string(o.label)}, {"text", o.text}});
  json out = {{"id", q.id},
              {"question", {{"stem", q.stem}, {"choices", std::move(choices)}}},
              {"answerKey", label_string(q.answer_key)}};
  if (q.gold_fact) out["fact1"] = *q.gold_fact;
  if (q.gold_missing_knowledge) out["gold_missing_knowledge"] = *q.gold_missing_knowledge;
  return out;
}

std::vector<Question> parse_questions(std::string_view content, const std::string& source) {
  std::vector<Question> out;
  std::set<std::string> ids;
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw DataError(line_prefix(source, i + 1) + "malformed JSON: " + e.what());
    }
    Question q;
    try {
      q = parse_question(record);
    } catch (const DataError& e) {
      throw DataError(line_prefix(source, i + 1) + e.what());
    }
    if (!ids.insert(q.id).second) throw DataError(line_prefix(source, i + 1) + "duplicate question id " + q.id);
    out.push_back(std::move(q));
  }
  if (out.empty()) throw DataError(source + ": no questions");
  return out;
}

std::vector<Question> load_questions(const std::string& path) {
  return parse_questions(read_file(path), path);
}

void save_questions(const std::string& path, std::span<const Question> questions) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& q : questions) out << question_to_json(q).dump() << '\n';
}

template <typename Tag>
SentenceCorpus<Tag>::SentenceCorpus(std::vector<std::string> texts) : texts_(std::move(texts)) {
  if (texts_.empty()) throw DataError("corpus is empty");
  for (std::size_t i = 0; i < texts_.size(); ++i) {
    if (trim(texts_[i]).empty()) throw DataError("corpus entry " + std::to_string(i) + " is blank");
  }
}

template class SentenceCorpus<FactCorpusTag>;
template class SentenceCorpus<KnowledgeCorpusTag>;

std::vector<std::string> parse_sentence_lines(std::string_view content) {
  std::vector<std::string> out;
  for (auto& raw : split_lines(content)) {
    auto line = trim(raw);
    if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
      line = trim(std::string_view(line).substr(1, line.size() - 2));
    }
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

FactCorpus load_facts(const std::string& path) {
  auto lines = parse_sentence_lines(read_file(path));
  if (lines.empty()) throw DataError(path + ": fact corpus is empty");
  return FactCorpus(std::move(lines));
}

KnowledgeCorpus load_knowledge(const std::string& path) {
  auto lines = parse_sentence_lines(read_file(path));
  if (lines.empty()) throw DataError(path + ": knowledge corpus is empty");
  return KnowledgeCorpus(std::move(lines));
}

void save_sentences(const std::string& path, std::span<const std::string> sentences) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& s : sentences) out << s << '\n';
}

void EmbeddingTable::add(std::string key, std::vector<float> vector) {
  if (key.find_first_of("\t\n\r") != std::string::npos) {
    throw DataError("embedding key contains a tab or newline: " + key);
  }
  if (vector.empty()) throw DataError("empty embedding vector for key: " + key);
  for (float v : vector) {
    if (!std::isfinite(v)) throw DataError("non-finite embedding component for key: " + key);
  }
  if (keys_.empty()) {
    dim_ = vector.size();
  } else if (vector.size() != dim_) {
    throw DataError("ragged embedding dims: key '" + key + "' has " + std::to_string(vector.size()) +
                    ", expected " + std::to_string(dim_));
  }
  if (lookup_.count(key)) throw DataError("duplicate key in embedding table: " + key);
  lookup_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  vectors_.push_back(std::move(vector));
}

bool EmbeddingTable::contains(std::string_view key) const {
  return lookup_.find(std::string(key)) != lookup_.end();
}

const std::vector<float>* EmbeddingTable::find(std::string_view key) const {
  auto it = lookup_.find(std::string(key));
  return it == lookup_.end() ? nullptr : &vectors_[it->second];
}

const std::vector<float>& EmbeddingTable::at(std::string_view key) const {
  if (const auto* v = find(key)) return *v;
  throw DataError("missing embedding key: " + std::string(key));
}

void EmbeddingTable::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    out << keys_[i];
    for (float v : vectors_[i]) out << '\t' << format_float(v);
    out << '\n';
  }
}

void EmbeddingTable::save_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  put_u32(kEmbeddingVersion);
  put_u32(static_cast<std::uint32_t>(dim_));
  put_u32(static_cast<std::uint32_t>(keys_.size() & 0xffffffffu));
  put_u32(static_cast<std::uint32_t>(static_cast<std::uint64_t>(keys_.size()) >> 32));
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    put_u32(static_cast<std::uint32_t>(keys_[i].size()));
    out.write(keys_[i].data(), static_cast<std::streamsize>(keys_[i].size()));
    for (float v : vectors_[i]) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      put_u32(bits);
    }
  }
}

EmbeddingTable EmbeddingTable::parse_tsv(std::string_view content, const std::string& source) {
  EmbeddingTable table;
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(line_prefix(source, i + 1) + "expected key<TAB>values");
    std::string key = line.substr(0, tab);
    std::vector<float> vec;
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == '\t' || *p == ' ')) ++p;
      if (p == end) break;
      float v = 0.0f;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw DataError(line_prefix(source, i + 1) + "bad float component for key '" + key + "'");
      }
      if (!std::isfinite(v)) {
        throw DataError(line_prefix(source, i + 1) + "NaN/Inf component for key '" + key + "'");
      }
      vec.push_back(v);
      p = res.ptr;
    }
    try {
      table.add(std::move(key), std::move(vec));
    } catch (const DataError& e) {
      throw DataError(line_prefix(source, i + 1) + e.what());
    }
  }
  if (table.empty()) throw DataError(source + ": embedding table is empty");
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  auto content = read_file(path);
  if (content.size() >= sizeof(kEmbeddingMagic) &&
      std::memcmp(content.data(), kEmbeddingMagic, sizeof(kEmbeddingMagic)) == 0) {
    std::size_t pos = sizeof(kEmbeddingMagic);
    auto get_u32 = [&]() {
      if (pos + 4 > content.size()) throw DataError("truncated embedding file: " + path);
      auto b = reinterpret_cast<const unsigned char*>(content.data() + pos);
      pos += 4;
      return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
             (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    if (get_u32() != kEmbeddingVersion) throw DataError("unsupported embedding file version: " + path);
    std::uint32_t dim = get_u32();
    std::uint64_t count = get_u32();
    count |= static_cast<std::uint64_t>(get_u32()) << 32;
    EmbeddingTable table;
    for (std::uint64_t i = 0; i < count; ++i) {
      auto len = get_u32();
      if (pos + len > content.size()) throw DataError("truncated embedding file: " + path);
      std::string key = content.substr(pos, len);
      pos += len;
      std::vector<float> vec(dim);
      for (auto& v : vec) {
        auto bits = get_u32();
        std::memcpy(&v, &bits, sizeof(v));
      }
      table.add(std::move(key), std::move(vec));
    }
    if (table.empty()) throw DataError(path + ": embedding table is empty");
    return table;
  }
  return parse_tsv(content, path);
}

double dense_cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dense_cosine: dimension mismatch");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace abductir
