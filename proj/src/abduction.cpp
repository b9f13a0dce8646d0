#include "abductir/abduction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "abductir/errors.hpp"
#include "abductir/random.hpp"

namespace abductir {

namespace {

AbducedQuery make_query(AbductionModel model, TokenSet tokens) {
  AbducedQuery q;
  q.model = model;
  q.query_text = tokens.joined();
  q.tokens = std::move(tokens);
  return q;
}

TokenSet union_of(const TokenSet& h, const TokenSet& f) {
  TokenSet out = h;
  for (const auto& t : f) out.insert(t);
  return out;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    auto end = nl == std::string_view::npos ? content.size() : nl;
    auto line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

bool parse_prob(std::string_view text, double& out) {
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && end == text.data() + text.size() && out >= 0.0 && out <= 1.0;
}

}  // namespace

std::string to_string(AbductionModel model) {
  switch (model) {
    case AbductionModel::symmdiff: return "symmdiff";
    case AbductionModel::word_union: return "union";
    case AbductionModel::bow: return "bow";
    case AbductionModel::generated: return "generated";
  }
  return "symmdiff";
}

AbductionModel parse_abduction_model(std::string_view name) {
  if (name == "symmdiff") return AbductionModel::symmdiff;
  if (name == "union") return AbductionModel::word_union;
  if (name == "bow") return AbductionModel::bow;
  if (name == "generated") return AbductionModel::generated;
  throw ConfigError("unknown abduction model '" + std::string(name) +
                    "' (expected symmdiff, union, bow or generated)");
}

AbducedQuery symmetric_difference_query(const TokenSet& h, const TokenSet& f) {
  TokenSet out;
  for (const auto& t : h) {
    if (!f.contains(t)) out.insert(t);
  }
  for (const auto& t : f) {
    if (!h.contains(t)) out.insert(t);
  }
  return make_query(AbductionModel::symmdiff, std::move(out));
}

AbducedQuery word_union_query(const TokenSet& h, const TokenSet& f) {
  return make_query(AbductionModel::word_union, union_of(h, f));
}

TableWordProb::TableWordProb(std::unordered_map<std::string, double> table, double fallback)
    : table_(std::move(table)), fallback_(fallback) {
  if (!(fallback_ >= 0.0 && fallback_ <= 1.0)) throw DataError("word probability fallback outside [0, 1]");
  for (const auto& [w, p] : table_) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("word probability for '" + w + "' outside [0, 1]");
  }
}

double TableWordProb::prob(std::string_view word, std::span<const std::string>) const {
  auto it = table_.find(std::string(word));
  return it == table_.end() ? fallback_ : it->second;
}

TableWordProb TableWordProb::load(const std::string& path) {
  const std::string content = read_file(path);
  std::unordered_map<std::string, double> table;
  double fallback = 0.5;
  std::size_t line_no = 0;
  for (auto line : split_lines(content)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    double p = 0.0;
    if (tab == std::string_view::npos || !parse_prob(line.substr(tab + 1), p)) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected word<TAB>probability in [0, 1]");
    }
    std::string word(line.substr(0, tab));
    if (word == "<default>") {
      fallback = p;
    } else {
      table[word] = p;
    }
  }
  return TableWordProb(std::move(table), fallback);
}

void TableWordProb::save(const std::string& path) const {
  std::vector<std::pair<std::string, double>> rows(table_.begin(), table_.end());
  std::sort(rows.begin(), rows.end());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "<default>\t" << format_double(fallback_) << '\n';
  for (const auto& [w, p] : rows) out << w << '\t' << format_double(p) << '\n';
}

AbducedQuery bag_of_words_query(const TokenSet& h, const TokenSet& f, const WordProbProvider& provider,
                                double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("bag-of-words threshold must be in [0, 1], got " + format_double(theta));
  }
  const TokenSet all = union_of(h, f);
  TokenSet out;
  for (const auto& w : all) {
    double p = provider.prob(w, all.tokens());
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ScorerError("word probability provider " + provider.name() + " returned " + format_double(p) +
                        " for '" + w + "'");
    }
    if (p > theta) out.insert(w);
  }
  return make_query(AbductionModel::bow, std::move(out));
}

std::vector<BowTrainingExample> build_bow_training_data(std::span<const BowSource> sources,
                                                        const EmbeddingTable* wordvec,
                                                        const BowDataOptions& options) {
  std::vector<BowTrainingExample> all;
  bool any_gold = false;
  for (const auto& src : sources) {
    if (src.gold_knowledge.empty()) continue;
    any_gold = true;
    std::vector<const std::vector<float>*> gold_vecs;
    if (wordvec) {
      for (const auto& g : src.gold_knowledge) {
        if (const auto* v = wordvec->find(g)) gold_vecs.push_back(v);
      }
    }
    const TokenSet context = union_of(src.hypothesis, src.facts);
    for (const auto& w : context) {
      bool positive = src.gold_knowledge.contains(w);
      if (!positive && wordvec) {
        if (const auto* v = wordvec->find(w)) {
          for (const auto* g : gold_vecs) {
            if (dense_cosine(*v, *g) >= options.sim_threshold) {
              positive = true;
              break;
            }
          }
        }
      }
      all.push_back({src.question_id, w, context.tokens(), positive});
    }
  }
  if (!any_gold) throw DataError("no question carries gold missing knowledge");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < all.size(); ++i) (all[i].positive ? pos : neg).push_back(i);
  auto& larger = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  std::mt19937_64 rng(splitmix64(options.seed));
  portable_shuffle(std::span<std::size_t>(larger), rng);
  larger.resize(keep);

  std::vector<std::size_t> kept(pos);
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());
  std::vector<BowTrainingExample> out;
  out.reserve(kept.size());
  for (auto i : kept) out.push_back(std::move(all[i]));
  return out;
}

void save_bow_examples(const std::string& path, std::span<const BowTrainingExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& e : examples) {
    out << e.question_id << '\t' << e.word << '\t' << (e.positive ? '1' : '0') << '\t';
    for (std::size_t i = 0; i < e.context_tokens.size(); ++i) out << (i ? " " : "") << e.context_tokens[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<BowTrainingExample> load_bow_examples(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<BowTrainingExample> out;
  std::size_t line_no = 0;
  for (auto line : split_lines(content)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      auto tab = line.find('\t', pos);
      if (tab == std::string_view::npos) break;
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 3 || (fields[2] != "0" && fields[2] != "1")) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected qid<TAB>word<TAB>0|1<TAB>context");
    }
    BowTrainingExample e{std::string(fields[0]), std::string(fields[1]), {}, fields[2] == "1"};
    auto ctx = line.substr(pos);
    std::size_t p = 0;
    while (p < ctx.size()) {
      auto sp = ctx.find(' ', p);
      auto end = sp == std::string_view::npos ? ctx.size() : sp;
      if (end > p) e.context_tokens.emplace_back(ctx.substr(p, end - p));
      p = end + 1;
    }
    out.push_back(std::move(e));
  }
  return out;
}

TableWordProb fit_word_probs(std::span<const BowTrainingExample> examples, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("fit_word_probs: alpha must be positive");
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> counts;  // positives, total
  std::size_t positives = 0;
  for (const auto& e : examples) {
    auto& c = counts[e.word];
    c.first += e.positive ? 1 : 0;
    c.second += 1;
    positives += e.positive ? 1 : 0;
  }
  const double prior = examples.empty() ? 0.5 : double(positives) / double(examples.size());
  std::unordered_map<std::string, double> table;
  for (const auto& [w, c] : counts) {
    table[w] = (double(c.first) + alpha * prior) / (double(c.second) + alpha);
  }
  return TableWordProb(std::move(table), prior);
}

GeneratedChoice select_generated_knowledge(std::span<const std::string> candidates, const TokenSet& h,
                                           const TokenSet& f, const TokenSet* gold_knowledge,
                                           const TokenizerConfig& tokenizer) {
  if (candidates.empty()) throw DataError("no generated candidates to select from");
  double denom = 1.0;
  if (gold_knowledge) {
    if (gold_knowledge->empty()) throw DataError("gold missing knowledge has no tokens; overlap score undefined");
    denom = double(gold_knowledge->size());
  }
  TokenizerConfig keep = tokenizer;
  keep.remove_stopwords = false;
  const TokenSet context = union_of(h, f);
  GeneratedChoice best;
  bool first = true;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t overlap = 0;
    for (const auto& t : TokenSet::from_text(candidates[i], keep)) overlap += context.contains(t) ? 1 : 0;
    if (first || overlap > best.overlap) {
      best = {i, candidates[i], overlap, double(overlap) / denom};
      first = false;
    }
  }
  return best;
}

GeneratedCandidates load_generated_candidates(const std::string& path) {
  const std::string content = read_file(path);
  GeneratedCandidates out;
  std::size_t line_no = 0;
  for (auto line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + "malformed JSON: " + e.what());
    }
    try {
      auto qid = rec.at("question_id").get<std::string>();
      auto label = rec.at("option_label").get<std::string>();
      if (label.size() != 1) throw DataError(where + "option_label must be one letter");
      option_index(label[0]);
      auto cands = rec.at("candidates").get<std::vector<std::string>>();
      auto& slot = out[{qid, label[0]}];
      slot.insert(slot.end(), cands.begin(), cands.end());
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const std::out_of_range&) {
      throw DataError(where + "option_label outside A-D");
    }
  }
  return out;
}

TokenSet fact_tokens(std::span<const ScoredFact> facts, std::size_t count, const TokenizerConfig& tokenizer) {
  TokenSet out;
  for (std::size_t i = 0; i < std::min(count, facts.size()); ++i) {
    for (auto& t : tokenize(facts[i].text, tokenizer)) out.insert(std::move(t));
  }
  return out;
}

AbducedQuery abduce(const Question& q, const Hypothesis& h, std::span<const ScoredFact> facts,
                    const AbductionSettings& s) {
  TokenizerConfig content = s.tokenizer;
  content.remove_stopwords = true;
  AbducedQuery out;
  switch (s.model) {
    case AbductionModel::symmdiff:
      out = symmetric_difference_query(h.token_set, fact_tokens(facts, s.abduce_facts, content));
      break;
    case AbductionModel::word_union:
      out = word_union_query(h.token_set, fact_tokens(facts, s.abduce_facts, content));
      break;
    case AbductionModel::bow:
      if (!s.provider) throw ConfigError("bag-of-words abduction needs a word probability provider");
      out = bag_of_words_query(h.token_set, fact_tokens(facts, s.abduce_facts, content), *s.provider, s.theta);
      break;
    case AbductionModel::generated: {
      if (!s.candidates) throw ConfigError("generated abduction needs a candidates file");
      auto it = s.candidates->find({q.id, h.option_label});
      if (it == s.candidates->end() || it->second.empty()) {
        throw DataError("no generated candidates for question " + q.id + " option " + label_string(h.option_label));
      }
      TokenizerConfig keep = s.tokenizer;
      keep.remove_stopwords = false;
      TokenSet gold;
      if (q.gold_missing_knowledge) {
        for (const auto& k : *q.gold_missing_knowledge) {
          for (auto& t : tokenize(k, keep)) gold.insert(std::move(t));
        }
      }
      auto choice = select_generated_knowledge(it->second, TokenSet::from_text(h.text, keep),
                                               fact_tokens(facts, s.abduce_facts, keep),
                                               gold.empty() ? nullptr : &gold, s.tokenizer);
      out.model = AbductionModel::generated;
      out.tokens = TokenSet::from_text(choice.text, content);
      out.query_text = choice.text;
      break;
    }
  }
  out.question_id = q.id;
  out.option_label = h.option_label;
  return out;
}

}  // namespace abductir
