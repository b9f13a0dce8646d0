#include "abductir/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "abductir/errors.hpp"

namespace abductir {

namespace fs = std::filesystem;

namespace {

struct Field {
  const char* key;
  const char* help;
  std::function<void(PipelineConfig&, const json&)> set;
  std::function<json(const PipelineConfig&)> get;
  std::function<json(const std::string&)> parse_text;
};

template <typename T>
bool parse_number(const std::string& text, T& out) {
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && end == text.data() + text.size();
}

[[noreturn]] void bad_value(const char* key, const std::string& expected) {
  throw ConfigError(std::string("config key '") + key + "' expects " + expected);
}

template <typename T>
T from_json_checked(const char* key, const json& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) bad_value(key, "a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad_value(key, "true or false");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) bad_value(key, "a number");
    return v.get<double>();
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    if (!v.is_array()) bad_value(key, "a list of non-negative integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_unsigned()) bad_value(key, "a list of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  } else if constexpr (std::is_signed_v<T>) {
    if (!v.is_number_integer()) bad_value(key, "an integer");
    return v.get<T>();
  } else {
    if (!v.is_number_unsigned()) bad_value(key, "a non-negative integer");
    return v.get<T>();
  }
}

template <typename T>
json text_to_json(const char* key, const std::string& text) {
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    bad_value(key, "true or false");
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    json out = json::array();
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      std::size_t v = 0;
      if (!parse_number(trim(part), v)) bad_value(key, "a comma-separated list of non-negative integers");
      out.push_back(v);
    }
    return out;
  } else {
    T v{};
    if (!parse_number(text, v)) bad_value(key, std::is_floating_point_v<T> ? "a number" : "an integer");
    return v;
  }
}

template <typename T>
Field make_field(const char* key, const char* help, T PipelineConfig::*member) {
  return {key, help, [key, member](PipelineConfig& c, const json& v) { c.*member = from_json_checked<T>(key, v); },
          [member](const PipelineConfig& c) { return json(c.*member); },
          [key](const std::string& text) { return text_to_json<T>(key, text); }};
}

const std::vector<Field>& fields() {
  using C = PipelineConfig;
  static const std::vector<Field> kFields = {
      make_field("questions", "questions file (JSON lines)", &C::questions),
      make_field("facts", "open-book fact file, one per line", &C::facts),
      make_field("knowledge", "knowledge corpus, one sentence per line", &C::knowledge),
      make_field("embeddings", "sentence embedding table (TSV or binary)", &C::embeddings),
      make_field("word_embeddings", "word vectors for gen-bow-data", &C::word_embeddings),
      make_field("stopwords", "stopword list (default: built-in)", &C::stopwords),
      make_field("word_probs", "word probability table for the bow model", &C::word_probs),
      make_field("gen_candidates", "generated candidates for the generated model", &C::gen_candidates),
      make_field("index_cache", "knowledge index cache file", &C::index_cache),
      make_field("out_dir", "directory for stage files and reports", &C::out_dir),
      make_field("fact_scorer", "tfidf | embedding | remote", &C::fact_scorer),
      make_field("rel_scorer", "tfidf | embedding | remote | ir", &C::rel_scorer),
      make_field("sim_scorer", "tfidf | embedding | remote", &C::sim_scorer),
      make_field("answer_scorer", "lexical | remote", &C::answer_scorer),
      make_field("sts_scorer", "lexical | embedding | remote", &C::sts_scorer),
      make_field("index_mode", "tfidf | bm25", &C::index_mode),
      make_field("bm25_k1", "BM25 k1", &C::bm25_k1),
      make_field("bm25_b", "BM25 b", &C::bm25_b),
      make_field("stem", "strip plural suffixes when tokenizing", &C::stem),
      make_field("scorer_url", "scoring service URL (env ABDUCT_IR_SCORER_URL wins)", &C::scorer_url),
      make_field("model_id", "model id sent to the scoring service", &C::model_id),
      make_field("max_batch", "items per scoring request", &C::max_batch),
      make_field("timeout_ms", "scoring request timeout", &C::timeout_ms),
      make_field("abduction", "symmdiff | union | bow | generated", &C::abduction),
      make_field("abduce_facts", "facts whose words feed abduction", &C::abduce_facts),
      make_field("theta", "bag-of-words probability threshold", &C::theta),
      make_field("sim_threshold", "word-vector cosine for positive bow labels", &C::sim_threshold),
      make_field("samples_per_q", "sampled facts per question for STS pairs", &C::samples_per_q),
      make_field("fact_top_n", "facts retrieved per hypothesis", &C::fact_top_n),
      make_field("n_facts", "facts per passage (N)", &C::n_facts),
      make_field("n_knowledge", "knowledge sentences per passage (K)", &C::n_knowledge),
      make_field("pool_m", "IR candidates per abduced query", &C::pool_m),
      make_field("top_k", "knowledge sentences kept by the re-ranker", &C::top_k),
      make_field("max_tokens", "passage length limit in tokens", &C::max_tokens),
      make_field("answer_mode", "facts | sum | selection | weighted | both", &C::answer_mode),
      make_field("grid_n", "N values for grid", &C::grid_n),
      make_field("grid_k", "K values for grid", &C::grid_k),
      make_field("seed", "random seed", &C::seed),
      make_field("parallelism", "worker threads per stage", &C::parallelism),
  };
  return kFields;
}

const Field& field_for(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void check_choice(const char* key, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(std::string(key) + " must be one of " + list + "; got '" + value + "'");
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
void with_stage(const char* stage, const std::string& qid, char label, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, qid, label ? label_string(label) : "", e);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  check_choice("fact_scorer", fact_scorer, {"tfidf", "embedding", "remote"});
  check_choice("rel_scorer", rel_scorer, {"tfidf", "embedding", "remote", "ir"});
  check_choice("sim_scorer", sim_scorer, {"tfidf", "embedding", "remote"});
  check_choice("answer_scorer", answer_scorer, {"lexical", "remote"});
  check_choice("sts_scorer", sts_scorer, {"lexical", "embedding", "remote"});
  parse_scoring_mode(index_mode);
  parse_abduction_model(abduction);
  parse_answer_mode(answer_mode);
  if (n_facts < 1) throw ConfigError("n_facts must be >= 1");
  if (fact_top_n < n_facts) throw ConfigError("fact_top_n must be >= n_facts");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (n_knowledge > top_k) throw ConfigError("n_knowledge must be <= top_k");
  if (pool_m < 1) throw ConfigError("pool_m must be >= 1");
  if (abduce_facts < 1) throw ConfigError("abduce_facts must be >= 1");
  if (abduce_facts > fact_top_n) throw ConfigError("abduce_facts must be <= fact_top_n");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0, 1]");
  if (!(sim_threshold >= -1.0 && sim_threshold <= 1.0)) throw ConfigError("sim_threshold must be in [-1, 1]");
  if (!(bm25_k1 >= 0.0)) throw ConfigError("bm25_k1 must be >= 0");
  if (!(bm25_b >= 0.0 && bm25_b <= 1.0)) throw ConfigError("bm25_b must be in [0, 1]");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (max_batch < 1) throw ConfigError("max_batch must be >= 1");
  if (timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
  if (grid_n.empty() || grid_k.empty()) throw ConfigError("grid_n and grid_k must be nonempty");
  for (auto n : grid_n) {
    if (n < 1) throw ConfigError("grid_n values must be >= 1");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
}

TokenizerConfig PipelineConfig::tokenizer() const {
  TokenizerConfig t;
  t.stem = stem;
  if (!stopwords.empty()) {
    t.stopwords = std::make_shared<const StopwordList>(StopwordList::load(stopwords));
  }
  return t;
}

std::string PipelineConfig::stage_path(const std::string& file) const { return (fs::path(out_dir) / file).string(); }

void apply_config_json(PipelineConfig& config, const json& object) {
  if (!object.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : object.items()) field_for(key).set(config, value);
}

PipelineConfig load_config_file(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  json object;
  try {
    object = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
  PipelineConfig config;
  apply_config_json(config, object);
  return config;
}

json config_to_json(const PipelineConfig& config) {
  json out = json::object();
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto& f = field_for(key);
  f.set(config, f.parse_text(value));
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.help);
  return out;
}

void require_paths(std::initializer_list<std::pair<const char*, const std::string*>> paths) {
  for (const auto& [key, path] : paths) {
    if (path->empty()) throw ConfigError(std::string("missing required setting '") + key + "'");
    if (!fs::exists(*path)) throw ConfigError(std::string(key) + " file not found: " + *path);
  }
}

void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t error_index = n;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        failed = true;
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

PipelineResources::PipelineResources(PipelineConfig config) : config_(std::move(config)) { config_.validate(); }

const FactCorpus& PipelineResources::facts() {
  if (!facts_) {
    require_paths({{"facts", &config_.facts}});
    facts_ = load_facts(config_.facts);
  }
  return *facts_;
}

const KnowledgeCorpus& PipelineResources::knowledge() {
  if (!knowledge_) {
    require_paths({{"knowledge", &config_.knowledge}});
    knowledge_ = load_knowledge(config_.knowledge);
  }
  return *knowledge_;
}

std::shared_ptr<const InvertedIndex> PipelineResources::knowledge_index() {
  if (knowledge_index_) return knowledge_index_;
  const auto& corpus = knowledge();
  const auto tokenizer = config_.tokenizer();
  IndexMode mode{parse_scoring_mode(config_.index_mode), config_.bm25_k1, config_.bm25_b};
  const auto& cache = config_.index_cache;
  if (!cache.empty() && fs::exists(cache)) {
    auto loaded = InvertedIndex::load(cache);
    if (loaded.doc_count() == corpus.size() && loaded.mode().kind == mode.kind && loaded.mode().k1 == mode.k1 &&
        loaded.mode().b == mode.b && loaded.tokenizer().stem == tokenizer.stem &&
        loaded.tokenizer().stopword_list().words() == tokenizer.stopword_list().words()) {
      knowledge_index_ = std::make_shared<const InvertedIndex>(std::move(loaded));
      return knowledge_index_;
    }
  }
  knowledge_index_ = std::make_shared<const InvertedIndex>(InvertedIndex::build(corpus.texts(), mode, tokenizer));
  if (!cache.empty()) knowledge_index_->save(cache);
  return knowledge_index_;
}

std::shared_ptr<const EmbeddingTable> PipelineResources::embeddings() {
  if (!embeddings_) {
    require_paths({{"embeddings", &config_.embeddings}});
    embeddings_ = std::make_shared<const EmbeddingTable>(EmbeddingTable::load(config_.embeddings));
  }
  return embeddings_;
}

BridgeClient PipelineResources::make_client() const {
  RemoteConfig rc;
  rc.url = resolve_scorer_url(config_.scorer_url);
  if (rc.url.empty()) throw ConfigError("remote scorer selected but no scorer_url or ABDUCT_IR_SCORER_URL given");
  rc.model_id = config_.model_id;
  rc.max_batch = config_.max_batch;
  rc.timeout_ms = config_.timeout_ms;
  return BridgeClient(rc);
}

std::shared_ptr<const SimilarityScorer> PipelineResources::make_similarity(const std::string& kind,
                                                                           const std::string& role) {
  if (kind == "embedding") return std::make_shared<EmbeddingCosineScorer>(embeddings());
  if (kind == "remote") return std::make_shared<RemoteSimilarityScorer>(make_client());
  if (role == "fact") {
    if (!fact_index_) {
      fact_index_ = std::make_shared<const InvertedIndex>(
          InvertedIndex::build(facts().texts(), IndexMode::tfidf(), config_.tokenizer()));
    }
    return std::make_shared<TfidfCosineScorer>(fact_index_, facts().texts());
  }
  return std::make_shared<TfidfCosineScorer>(knowledge_index(), knowledge().texts());
}

const SimilarityScorer& PipelineResources::fact_scorer() {
  if (!fact_scorer_) fact_scorer_ = make_similarity(config_.fact_scorer, "fact");
  return *fact_scorer_;
}

const SimilarityScorer* PipelineResources::rel_scorer() {
  if (!rel_resolved_) {
    if (config_.rel_scorer != "ir") rel_scorer_ = make_similarity(config_.rel_scorer, "knowledge");
    rel_resolved_ = true;
  }
  return rel_scorer_.get();
}

const SimilarityScorer& PipelineResources::sim_scorer() {
  if (!sim_scorer_) sim_scorer_ = make_similarity(config_.sim_scorer, "knowledge");
  return *sim_scorer_;
}

const SimilarityScorer& PipelineResources::sts_scorer() {
  if (!sts_scorer_) {
    if (config_.sts_scorer == "lexical") {
      sts_scorer_ = std::make_shared<ScaledScorer>(make_similarity("tfidf", "fact"), 5.0);
    } else {
      sts_scorer_ = make_similarity(config_.sts_scorer, "fact");
    }
  }
  return *sts_scorer_;
}

const AnswerScorer& PipelineResources::answer_scorer() {
  if (!answer_scorer_) {
    if (config_.answer_scorer == "remote") {
      answer_scorer_ = std::make_shared<RemoteAnswerScorer>(make_client());
    } else {
      answer_scorer_ = std::make_shared<LexicalAnswerScorer>(config_.tokenizer());
    }
  }
  return *answer_scorer_;
}

const WordProbProvider* PipelineResources::word_probs() {
  if (!word_probs_ && parse_abduction_model(config_.abduction) == AbductionModel::bow) {
    require_paths({{"word_probs", &config_.word_probs}});
    word_probs_ = std::make_unique<TableWordProb>(TableWordProb::load(config_.word_probs));
  }
  return word_probs_.get();
}

const GeneratedCandidates* PipelineResources::generated_candidates() {
  if (!candidates_ && parse_abduction_model(config_.abduction) == AbductionModel::generated) {
    require_paths({{"gen_candidates", &config_.gen_candidates}});
    candidates_ = load_generated_candidates(config_.gen_candidates);
  }
  return candidates_ ? &*candidates_ : nullptr;
}

void PipelineResources::prepare_all() {
  fact_scorer();
  knowledge_index();
  rel_scorer();
  sim_scorer();
  answer_scorer();
  word_probs();
  generated_candidates();
}

std::vector<HypothesisSet> stage_hypothesize(std::span<const Question> questions, PipelineResources& res) {
  const auto tokenizer = res.config().tokenizer();
  std::vector<HypothesisSet> out(questions.size());
  parallel_for(questions.size(), res.config().parallelism, [&](std::size_t i) {
    with_stage("hypothesize", questions[i].id, 0, [&] { out[i] = generate_hypotheses(questions[i], tokenizer); });
  });
  return out;
}

std::vector<FactLists> stage_retrieve_facts(std::span<const HypothesisSet> hyps, PipelineResources& res,
                                            std::size_t top_n) {
  const auto& scorer = res.fact_scorer();
  const auto& corpus = res.facts();
  std::vector<FactLists> out(hyps.size());
  parallel_for(hyps.size(), res.config().parallelism, [&](std::size_t i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      const auto& h = hyps[i][j];
      with_stage("retrieve-facts", h.question_id, h.option_label,
                 [&] { out[i][j] = retrieve_facts(h, scorer, corpus, top_n); });
    }
  });
  return out;
}

std::vector<QuerySet> stage_abduce(std::span<const Question> questions, std::span<const HypothesisSet> hyps,
                                   std::span<const FactLists> facts, PipelineResources& res) {
  const auto& cfg = res.config();
  AbductionSettings settings;
  settings.model = parse_abduction_model(cfg.abduction);
  settings.abduce_facts = cfg.abduce_facts;
  settings.theta = cfg.theta;
  settings.tokenizer = cfg.tokenizer();
  settings.provider = res.word_probs();
  settings.candidates = res.generated_candidates();
  std::vector<QuerySet> out(questions.size());
  parallel_for(questions.size(), cfg.parallelism, [&](std::size_t i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      with_stage("abduce", questions[i].id, kOptionLabels[j],
                 [&] { out[i][j] = abduce(questions[i], hyps[i][j], facts[i][j], settings); });
    }
  });
  return out;
}

std::vector<PoolSet> stage_retrieve_knowledge(std::span<const HypothesisSet> hyps, std::span<const QuerySet> queries,
                                              PipelineResources& res) {
  auto index = res.knowledge_index();
  const auto& corpus = res.knowledge();
  const auto* rel = res.rel_scorer();
  const auto pool_m = res.config().pool_m;
  std::vector<PoolSet> out(hyps.size());
  parallel_for(hyps.size(), res.config().parallelism, [&](std::size_t i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      const auto& h = hyps[i][j];
      with_stage("retrieve-knowledge", h.question_id, h.option_label,
                 [&] { out[i][j] = retrieve_candidates(queries[i][j], h, *index, corpus, rel, pool_m); });
    }
  });
  return out;
}

std::vector<KnowledgeLists> stage_rerank(std::span<const PoolSet> pools, PipelineResources& res, std::size_t top_k) {
  const auto& sim_scorer = res.sim_scorer();
  std::vector<KnowledgeLists> out(pools.size());
  parallel_for(pools.size(), res.config().parallelism, [&](std::size_t i) {
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      const auto& pool = pools[i][j];
      if (pool.items.empty()) continue;
      with_stage("rerank", pool.items.front().question_id, pool.items.front().option_label, [&] {
        ScorerPoolSimilarity sim(pool.items, sim_scorer);
        out[i][j] = information_gain_rerank(pool.items, std::cref(sim), top_k, pool.rel_max);
      });
    }
  });
  return out;
}

std::vector<AnswerOutcome> stage_answer(std::span<const Question> questions, std::span<const FactLists> facts,
                                        std::span<const KnowledgeLists> knowledge, PipelineResources& res,
                                        std::size_t n_facts, std::size_t n_knowledge,
                                        std::vector<PassageSet>* facts_passages,
                                        std::vector<PassageSet>* knowledge_passages) {
  const auto& cfg = res.config();
  const auto& scorer = res.answer_scorer();
  const auto mode = parse_answer_mode(cfg.answer_mode);
  const auto tokenizer = cfg.tokenizer();
  std::vector<AnswerOutcome> out(questions.size());
  std::vector<PassageSet> fp(questions.size()), kp(questions.size());
  parallel_for(questions.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& q = questions[i];
    for (std::size_t j = 0; j < kOptionCount; ++j) {
      fp[i][j] = assemble_passage(facts[i][j], {}, n_facts, 0, cfg.max_tokens, tokenizer);
      fp[i][j].question_id = q.id;
      fp[i][j].option_label = kOptionLabels[j];
      if (n_knowledge > 0) {
        kp[i][j] = assemble_passage(facts[i][j], knowledge[i][j], n_facts, n_knowledge, cfg.max_tokens, tokenizer);
        kp[i][j].question_id = q.id;
        kp[i][j].option_label = kOptionLabels[j];
      }
    }
    with_stage("answer", q.id, 0,
               [&] { out[i] = predict(q, fp[i], n_knowledge > 0 ? &kp[i] : nullptr, scorer, mode); });
  });
  if (facts_passages) *facts_passages = std::move(fp);
  if (knowledge_passages) *knowledge_passages = std::move(kp);
  return out;
}

json EvalReport::to_json() const {
  json out = {{"n_facts", n_facts},
              {"n_knowledge", n_knowledge},
              {"n_total", n_total},
              {"n_correct", n_correct},
              {"accuracy", accuracy}};
  out["any_passage_count"] = any_passage_count ? json(*any_passage_count) : json(nullptr);
  out["correct_passage_count"] = correct_passage_count ? json(*correct_passage_count) : json(nullptr);
  return out;
}

EvalReport compute_metrics(std::span<const Prediction> predictions, std::span<const Question> questions,
                           std::span<const FactLists> facts, std::size_t n_facts) {
  if (predictions.size() != questions.size()) {
    throw DataError("predictions cover " + std::to_string(predictions.size()) + " questions, expected " +
                    std::to_string(questions.size()));
  }
  if (!facts.empty() && facts.size() != questions.size()) {
    throw DataError("fact retrievals cover " + std::to_string(facts.size()) + " questions, expected " +
                    std::to_string(questions.size()));
  }
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.question_id, &p).second) throw DataError("duplicate prediction for " + p.question_id);
  }
  EvalReport r;
  r.n_facts = n_facts;
  r.n_total = questions.size();
  bool any_gold = false;
  std::size_t any = 0, correct = 0;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    auto it = by_id.find(q.id);
    if (it == by_id.end()) throw DataError("no prediction for question " + q.id);
    if (it->second->chosen_label == q.answer_key) ++r.n_correct;
    if (facts.empty() || !q.gold_fact) continue;
    any_gold = true;
    const std::string gold = normalize_for_match(*q.gold_fact);
    auto hit = [&](const std::vector<ScoredFact>& list) {
      for (std::size_t k = 0; k < std::min(n_facts, list.size()); ++k) {
        if (normalize_for_match(list[k].text) == gold) return true;
      }
      return false;
    };
    bool in_any = false;
    for (const auto& list : facts[i]) in_any = in_any || hit(list);
    any += in_any ? 1 : 0;
    correct += hit(facts[i][q.answer_index()]) ? 1 : 0;
  }
  r.accuracy = r.n_total == 0 ? 0.0 : double(r.n_correct) / double(r.n_total);
  if (any_gold) {
    r.any_passage_count = any;
    r.correct_passage_count = correct;
  }
  return r;
}

std::string render_report_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  auto cell = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("-"); };
  char line[160];
  std::snprintf(line, sizeof line, "%4s %4s %12s %16s %12s  %s\n", "N", "K", "Any Passage", "Correct Passage",
                "Accuracy(%)", "Correct");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%4zu %4zu %12s %16s %12.1f  %zu/%zu\n", r.n_facts, r.n_knowledge,
                  cell(r.any_passage_count).c_str(), cell(r.correct_passage_count).c_str(), 100.0 * r.accuracy,
                  r.n_correct, r.n_total);
    out << line;
  }
  return out.str();
}

void write_reports(const std::string& out_dir, std::span<const EvalReport> reports, const std::string& label) {
  fs::create_directories(out_dir);
  const std::string stamp = utc_timestamp();
  std::ofstream jsonl(fs::path(out_dir) / "report.jsonl", std::ios::binary | std::ios::app);
  if (!jsonl) throw DataError("cannot write report.jsonl in " + out_dir);
  jsonl << json{{"header", {{"timestamp", stamp}, {"command", label}}}}.dump() << '\n';
  for (const auto& r : reports) jsonl << r.to_json().dump() << '\n';

  std::ofstream txt(fs::path(out_dir) / "report.txt", std::ios::binary | std::ios::trunc);
  if (!txt) throw DataError("cannot write report.txt in " + out_dir);
  txt << "# " << label << " " << stamp << '\n' << render_report_table(reports);
}

namespace {

struct Retrievals {
  std::vector<Question> questions;
  std::vector<FactLists> facts;
  std::vector<KnowledgeLists> knowledge;
};

Retrievals retrieve_all(const PipelineConfig& cfg, PipelineResources& res, std::size_t fact_top_n,
                        std::size_t top_k) {
  require_paths({{"questions", &cfg.questions}, {"facts", &cfg.facts}, {"knowledge", &cfg.knowledge}});
  fs::create_directories(cfg.out_dir);
  Retrievals r;
  r.questions = load_questions(cfg.questions);
  res.prepare_all();
  auto hyps = stage_hypothesize(r.questions, res);
  save_hypotheses(cfg.stage_path("hypotheses.stage.jsonl"), hyps);
  r.facts = stage_retrieve_facts(hyps, res, fact_top_n);
  save_fact_lists(cfg.stage_path("facts.stage.jsonl"), r.questions, r.facts);
  auto queries = stage_abduce(r.questions, hyps, r.facts, res);
  save_queries(cfg.stage_path("queries.stage.jsonl"), queries);
  auto pools = stage_retrieve_knowledge(hyps, queries, res);
  save_pools(cfg.stage_path("candidates.stage.jsonl"), r.questions, pools);
  r.knowledge = stage_rerank(pools, res, top_k);
  save_knowledge_lists(cfg.stage_path("knowledge.stage.jsonl"), r.questions, r.knowledge);
  return r;
}

}  // namespace

std::vector<Prediction> answer_and_save(PipelineResources& res, std::span<const Question> questions,
                                        std::span<const FactLists> facts, std::span<const KnowledgeLists> knowledge) {
  const auto& config = res.config();
  std::vector<PassageSet> fp, kp;
  auto outcomes = stage_answer(questions, facts, knowledge, res, config.n_facts, config.n_knowledge, &fp, &kp);
  std::vector<json> rows_f, rows_fk;
  std::vector<Prediction> predictions;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    rows_f.push_back(scores_to_json(questions[i].id, o.facts_matrix, fp[i], o.prediction.sum_scores));
    if (o.knowledge_matrix) {
      rows_fk.push_back(scores_to_json(questions[i].id, *o.knowledge_matrix, kp[i], o.prediction.knowledge_scores));
    }
    predictions.push_back(o.prediction);
  }
  fs::create_directories(config.out_dir);
  write_jsonl(config.stage_path("scores_f.stage.jsonl"), rows_f);
  if (config.n_knowledge > 0) write_jsonl(config.stage_path("scores_fk.stage.jsonl"), rows_fk);
  save_predictions(config.stage_path("predictions.jsonl"), predictions);
  return predictions;
}

std::vector<BowSource> make_bow_sources(std::span<const Question> questions, std::span<const HypothesisSet> hyps,
                                        std::span<const FactLists> facts, std::size_t abduce_facts,
                                        const TokenizerConfig& tokenizer) {
  TokenizerConfig content = tokenizer;
  content.remove_stopwords = true;
  std::vector<BowSource> out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    if (!q.gold_missing_knowledge) continue;
    const auto a = q.answer_index();
    BowSource src;
    src.question_id = q.id;
    src.hypothesis = hyps[i][a].token_set;
    src.facts = fact_tokens(facts[i][a], abduce_facts, content);
    for (const auto& k : *q.gold_missing_knowledge) {
      for (auto& t : tokenize(k, content)) src.gold_knowledge.insert(std::move(t));
    }
    out.push_back(std::move(src));
  }
  return out;
}

RunResult run_pipeline(const PipelineConfig& config) {
  PipelineResources res(config);
  auto r = retrieve_all(config, res, config.fact_top_n, config.top_k);
  RunResult result;
  result.predictions = answer_and_save(res, r.questions, r.facts, r.knowledge);
  result.report = compute_metrics(result.predictions, r.questions, r.facts, config.n_facts);
  result.report.n_knowledge = config.n_knowledge;
  write_reports(config.out_dir, std::span<const EvalReport>(&result.report, 1), "run");
  return result;
}

std::vector<EvalReport> run_grid(const PipelineConfig& config) {
  PipelineResources res(config);
  const auto max_n = std::max(config.fact_top_n, *std::max_element(config.grid_n.begin(), config.grid_n.end()));
  const auto max_k = std::max(config.top_k, *std::max_element(config.grid_k.begin(), config.grid_k.end()));
  auto r = retrieve_all(config, res, max_n, max_k);
  std::vector<EvalReport> reports;
  for (auto n : config.grid_n) {
    for (auto k : config.grid_k) {
      auto outcomes = stage_answer(r.questions, r.facts, r.knowledge, res, n, k);
      std::vector<Prediction> preds;
      for (auto& o : outcomes) preds.push_back(std::move(o.prediction));
      auto report = compute_metrics(preds, r.questions, r.facts, n);
      report.n_knowledge = k;
      reports.push_back(report);
    }
  }
  write_reports(config.out_dir, reports, "grid");
  return reports;
}

}  // namespace abductir
