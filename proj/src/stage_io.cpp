#include "abductir/stage_io.hpp"

#include <fstream>
#include <map>
#include <optional>

#include "abductir/errors.hpp"

namespace abductir {

namespace {

char parse_label(const json& row) {
  auto s = row.at("option_label").get<std::string>();
  if (s.size() != 1) throw DataError("option_label must be a single letter, got '" + s + "'");
  option_index(s[0]);
  return s[0];
}

HypothesisRule parse_rule(const std::string& name) {
  for (auto r : {HypothesisRule::wh_in_place, HypothesisRule::which_of_these, HypothesisRule::wh_do_support,
                 HypothesisRule::wh_subject, HypothesisRule::placeholder, HypothesisRule::append,
                 HypothesisRule::empty_option}) {
    if (to_string(r) == name) return r;
  }
  throw DataError("unknown hypothesis rule '" + name + "'");
}

template <typename T>
json array_of(const std::array<T, kOptionCount>& a) {
  json out = json::array();
  for (const auto& v : a) out.push_back(v);
  return out;
}

/// Reads per-option rows and places them by (question, option). `parse`
/// turns one row into the stored value.
template <typename Bundle, typename Parse>
std::vector<Bundle> group_rows(const std::string& path, std::span<const Question> questions, Parse parse) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < questions.size(); ++i) index.emplace(questions[i].id, i);
  std::vector<Bundle> out(questions.size());
  std::vector<std::array<bool, kOptionCount>> seen(questions.size(), {false, false, false, false});
  auto rows = read_jsonl(path);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = path + " row " + std::to_string(r + 1) + ": ";
    try {
      auto qid = rows[r].at("question_id").get<std::string>();
      char label = parse_label(rows[r]);
      auto it = index.find(qid);
      if (it == index.end()) continue;
      auto j = option_index(label);
      if (seen[it->second][j]) throw DataError("duplicate row for question " + qid + " option " + label_string(label));
      seen[it->second][j] = true;
      out[it->second][j] = parse(rows[r]);
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    } catch (const std::out_of_range& e) {
      throw DataError(where + "option label outside A-D");
    }
  }
  for (std::size_t i = 0; i < questions.size(); ++i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      if (!seen[i][j]) {
        throw DataError(path + " has no row for question " + questions[i].id + " option " +
                        label_string(kOptionLabels[j]));
      }
    }
  }
  return out;
}

std::vector<KnowledgeItem> parse_items(const json& row, const std::string& qid, char label) {
  std::vector<KnowledgeItem> items;
  for (const auto& it : row.at("items")) {
    KnowledgeItem k;
    k.question_id = qid;
    k.option_label = label;
    k.sent_id = it.at("sent_id").get<std::size_t>();
    k.text = it.at("text").get<std::string>();
    k.ir_score = it.at("ir_score").get<double>();
    k.rel = it.at("rel").get<double>();
    k.red = it.value("red", 0.0);
    k.rank_score = it.value("rank_score", 0.0);
    items.push_back(std::move(k));
  }
  return items;
}

}  // namespace

void write_jsonl(const std::string& path, std::span<const json> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::vector<json> read_jsonl(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<json> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    auto end = nl == std::string::npos ? content.size() : nl;
    std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
  }
  return rows;
}

json hypothesis_to_json(const Hypothesis& h) {
  return {{"question_id", h.question_id},
          {"option_label", label_string(h.option_label)},
          {"text", h.text},
          {"tokens", h.token_set.tokens()},
          {"rule", to_string(h.rule)}};
}

json facts_to_json(const std::string& question_id, char label, std::span<const ScoredFact> facts) {
  json list = json::array();
  for (const auto& f : facts) list.push_back({{"fact_id", f.fact_id}, {"text", f.text}, {"rel", f.rel}});
  return {{"question_id", question_id}, {"option_label", label_string(label)}, {"facts", std::move(list)}};
}

json query_to_json(const AbducedQuery& q) {
  return {{"question_id", q.question_id},
          {"option_label", label_string(q.option_label)},
          {"model", to_string(q.model)},
          {"tokens", q.tokens.tokens()},
          {"query_text", q.query_text}};
}

json pool_to_json(const std::string& question_id, char label, const CandidatePool& pool) {
  json items = json::array();
  for (const auto& k : pool.items) {
    items.push_back({{"sent_id", k.sent_id}, {"text", k.text}, {"ir_score", k.ir_score}, {"rel", k.rel}});
  }
  return {{"question_id", question_id},
          {"option_label", label_string(label)},
          {"rel_max", pool.rel_max},
          {"items", std::move(items)}};
}

json knowledge_to_json(const std::string& question_id, char label, std::span<const KnowledgeItem> items) {
  json list = json::array();
  for (const auto& k : items) {
    list.push_back({{"sent_id", k.sent_id},
                    {"text", k.text},
                    {"ir_score", k.ir_score},
                    {"rel", k.rel},
                    {"red", k.red},
                    {"rank_score", k.rank_score}});
  }
  return {{"question_id", question_id}, {"option_label", label_string(label)}, {"items", std::move(list)}};
}

json scores_to_json(const std::string& question_id, const ScoreMatrix& m, const PassageSet& passages,
                    const Scores4& totals) {
  json matrix = json::array();
  for (const auto& row : m) matrix.push_back(array_of(row));
  json texts = json::array();
  for (const auto& p : passages) texts.push_back(p.text);
  return {{"question_id", question_id}, {"matrix", std::move(matrix)}, {"totals", array_of(totals)},
          {"passages", std::move(texts)}};
}

json prediction_to_json(const Prediction& p) {
  return {{"question_id", p.question_id},
          {"chosen_label", label_string(p.chosen_label)},
          {"sum_scores", array_of(p.sum_scores)},
          {"knowledge_scores", array_of(p.knowledge_scores)},
          {"selected_mask", array_of(p.selected_mask)},
          {"weighted_scores", array_of(p.weighted_scores)}};
}

std::vector<HypothesisSet> load_hypotheses(const std::string& path, std::span<const Question> questions,
                                           const TokenizerConfig& tokenizer) {
  TokenizerConfig content = tokenizer;
  content.remove_stopwords = true;
  return group_rows<HypothesisSet>(path, questions, [&](const json& row) {
    Hypothesis h;
    h.question_id = row.at("question_id").get<std::string>();
    h.option_label = parse_label(row);
    h.text = row.at("text").get<std::string>();
    h.rule = parse_rule(row.at("rule").get<std::string>());
    h.token_set = TokenSet::from_text(h.text, content);
    return h;
  });
}

std::vector<FactLists> load_fact_lists(const std::string& path, std::span<const Question> questions) {
  return group_rows<FactLists>(path, questions, [](const json& row) {
    std::vector<ScoredFact> facts;
    auto qid = row.at("question_id").get<std::string>();
    char label = parse_label(row);
    for (const auto& f : row.at("facts")) {
      facts.push_back({qid, label, f.at("fact_id").get<std::size_t>(), f.at("text").get<std::string>(),
                       f.at("rel").get<double>()});
    }
    return facts;
  });
}

std::vector<QuerySet> load_queries(const std::string& path, std::span<const Question> questions) {
  return group_rows<QuerySet>(path, questions, [](const json& row) {
    AbducedQuery q;
    q.question_id = row.at("question_id").get<std::string>();
    q.option_label = parse_label(row);
    q.model = parse_abduction_model(row.at("model").get<std::string>());
    q.tokens = TokenSet(row.at("tokens").get<std::vector<std::string>>());
    q.query_text = row.at("query_text").get<std::string>();
    return q;
  });
}

std::vector<PoolSet> load_pools(const std::string& path, std::span<const Question> questions) {
  return group_rows<PoolSet>(path, questions, [](const json& row) {
    CandidatePool pool;
    pool.rel_max = row.at("rel_max").get<double>();
    pool.items = parse_items(row, row.at("question_id").get<std::string>(), parse_label(row));
    return pool;
  });
}

std::vector<KnowledgeLists> load_knowledge_lists(const std::string& path, std::span<const Question> questions) {
  return group_rows<KnowledgeLists>(path, questions, [](const json& row) {
    return parse_items(row, row.at("question_id").get<std::string>(), parse_label(row));
  });
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::vector<Prediction> out;
  auto rows = read_jsonl(path);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    try {
      Prediction p;
      p.question_id = rows[r].at("question_id").get<std::string>();
      auto label = rows[r].at("chosen_label").get<std::string>();
      if (label.size() != 1) throw DataError("chosen_label must be one letter");
      option_index(label[0]);
      p.chosen_label = label[0];
      p.sum_scores = rows[r].at("sum_scores").get<Scores4>();
      p.knowledge_scores = rows[r].at("knowledge_scores").get<Scores4>();
      p.selected_mask = rows[r].at("selected_mask").get<Mask4>();
      p.weighted_scores = rows[r].at("weighted_scores").get<Scores4>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError(path + " row " + std::to_string(r + 1) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw DataError(path + " row " + std::to_string(r + 1) + ": chosen_label outside A-D");
    }
  }
  return out;
}

void save_hypotheses(const std::string& path, std::span<const HypothesisSet> sets) {
  std::vector<json> rows;
  for (const auto& set : sets) {
    for (const auto& h : set) rows.push_back(hypothesis_to_json(h));
  }
  write_jsonl(path, rows);
}

void save_fact_lists(const std::string& path, std::span<const Question> questions, std::span<const FactLists> lists) {
  std::vector<json> rows;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      rows.push_back(facts_to_json(questions[i].id, kOptionLabels[j], lists[i][j]));
    }
  }
  write_jsonl(path, rows);
}

void save_queries(const std::string& path, std::span<const QuerySet> sets) {
  std::vector<json> rows;
  for (const auto& set : sets) {
    for (const auto& q : set) rows.push_back(query_to_json(q));
  }
  write_jsonl(path, rows);
}

void save_pools(const std::string& path, std::span<const Question> questions, std::span<const PoolSet> pools) {
  std::vector<json> rows;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      rows.push_back(pool_to_json(questions[i].id, kOptionLabels[j], pools[i][j]));
    }
  }
  write_jsonl(path, rows);
}

void save_knowledge_lists(const std::string& path, std::span<const Question> questions,
                          std::span<const KnowledgeLists> lists) {
  std::vector<json> rows;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      rows.push_back(knowledge_to_json(questions[i].id, kOptionLabels[j], lists[i][j]));
    }
  }
  write_jsonl(path, rows);
}

void save_predictions(const std::string& path, std::span<const Prediction> predictions) {
  std::vector<json> rows;
  for (const auto& p : predictions) rows.push_back(prediction_to_json(p));
  write_jsonl(path, rows);
}

}  // namespace abductir
