#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "abductir/abduction.hpp"
#include "abductir/errors.hpp"
#include "abductir/fact_retrieval.hpp"
#include "abductir/pipeline.hpp"

namespace {

using namespace abductir;

std::string kebab(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct Settings {
  std::string config_file;
  std::map<std::string, std::string> raw;
};

void add_settings(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config_file, "JSON config file; flags override its values");
  for (const auto& [key, help] : config_keys()) {
    cmd->add_option("--" + kebab(key), s.raw[key], help);
  }
}

PipelineConfig resolve(CLI::App* cmd, const Settings& s) {
  PipelineConfig config = s.config_file.empty() ? PipelineConfig{} : load_config_file(s.config_file);
  for (const auto& [key, value] : s.raw) {
    if (cmd->count("--" + kebab(key)) > 0) apply_config_value(config, key, value);
  }
  config.validate();
  return config;
}

std::vector<Question> questions_of(const PipelineConfig& c) {
  require_paths({{"questions", &c.questions}});
  return load_questions(c.questions);
}

void cmd_hypothesize(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  std::filesystem::create_directories(c.out_dir);
  save_hypotheses(c.stage_path("hypotheses.stage.jsonl"), stage_hypothesize(qs, res));
}

void cmd_retrieve_facts(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  auto hyps = load_hypotheses(c.stage_path("hypotheses.stage.jsonl"), qs, c.tokenizer());
  save_fact_lists(c.stage_path("facts.stage.jsonl"), qs, stage_retrieve_facts(hyps, res, c.fact_top_n));
}

void cmd_gen_sts_pairs(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  StsPairOptions opt;
  opt.samples_per_q = c.samples_per_q;
  opt.seed = c.seed;
  opt.tokenizer = c.tokenizer();
  auto result = generate_sts_training_pairs(qs, res.facts(), res.sts_scorer(), opt);
  std::filesystem::create_directories(c.out_dir);
  save_sts_pairs(c.stage_path("sts_pairs.tsv"), result.pairs);
  std::cerr << "wrote " << result.pairs.size() << " pairs";
  if (result.skipped) std::cerr << "; skipped " << result.skipped << " questions without a gold fact";
  std::cerr << '\n';
}

void cmd_abduce(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  auto hyps = load_hypotheses(c.stage_path("hypotheses.stage.jsonl"), qs, c.tokenizer());
  auto facts = load_fact_lists(c.stage_path("facts.stage.jsonl"), qs);
  save_queries(c.stage_path("queries.stage.jsonl"), stage_abduce(qs, hyps, facts, res));
}

void cmd_gen_bow_data(const PipelineConfig& c) {
  auto qs = questions_of(c);
  auto hyps = load_hypotheses(c.stage_path("hypotheses.stage.jsonl"), qs, c.tokenizer());
  auto facts = load_fact_lists(c.stage_path("facts.stage.jsonl"), qs);
  std::optional<EmbeddingTable> wordvec;
  if (!c.word_embeddings.empty()) {
    require_paths({{"word_embeddings", &c.word_embeddings}});
    wordvec = EmbeddingTable::load(c.word_embeddings);
  }
  auto sources = make_bow_sources(qs, hyps, facts, c.abduce_facts, c.tokenizer());
  auto examples = build_bow_training_data(sources, wordvec ? &*wordvec : nullptr, {c.sim_threshold, c.seed});
  save_bow_examples(c.stage_path("bow_train.tsv"), examples);
  fit_word_probs(examples).save(c.stage_path("bow_word_probs.tsv"));
  std::cerr << "wrote " << examples.size() << " examples\n";
}

void cmd_retrieve_knowledge(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  auto hyps = load_hypotheses(c.stage_path("hypotheses.stage.jsonl"), qs, c.tokenizer());
  auto queries = load_queries(c.stage_path("queries.stage.jsonl"), qs);
  save_pools(c.stage_path("candidates.stage.jsonl"), qs, stage_retrieve_knowledge(hyps, queries, res));
}

void cmd_rerank(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  auto pools = load_pools(c.stage_path("candidates.stage.jsonl"), qs);
  save_knowledge_lists(c.stage_path("knowledge.stage.jsonl"), qs, stage_rerank(pools, res, c.top_k));
}

void cmd_answer(const PipelineConfig& c) {
  PipelineResources res(c);
  auto qs = questions_of(c);
  auto facts = load_fact_lists(c.stage_path("facts.stage.jsonl"), qs);
  std::vector<KnowledgeLists> knowledge(qs.size());
  if (c.n_knowledge > 0) knowledge = load_knowledge_lists(c.stage_path("knowledge.stage.jsonl"), qs);
  answer_and_save(res, qs, facts, knowledge);
}

void cmd_evaluate(const PipelineConfig& c) {
  auto qs = questions_of(c);
  auto preds = load_predictions(c.stage_path("predictions.jsonl"));
  std::vector<FactLists> facts;
  if (std::filesystem::exists(c.stage_path("facts.stage.jsonl"))) {
    facts = load_fact_lists(c.stage_path("facts.stage.jsonl"), qs);
  }
  auto report = compute_metrics(preds, qs, facts, c.n_facts);
  report.n_knowledge = c.n_knowledge;
  write_reports(c.out_dir, std::span<const EvalReport>(&report, 1), "evaluate");
  std::cout << render_report_table(std::span<const EvalReport>(&report, 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-book multiple-choice QA pipeline with abductive knowledge retrieval"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const PipelineConfig&);
  };
  const Command commands[] = {
      {"hypothesize", "turn each question/option pair into a hypothesis", cmd_hypothesize},
      {"retrieve-facts", "retrieve top open-book facts per hypothesis", cmd_retrieve_facts},
      {"gen-sts-pairs", "write similarity training pairs from gold facts", cmd_gen_sts_pairs},
      {"abduce", "build missing-knowledge queries", cmd_abduce},
      {"gen-bow-data", "write bag-of-words training data and a word table", cmd_gen_bow_data},
      {"retrieve-knowledge", "retrieve candidate knowledge per query", cmd_retrieve_knowledge},
      {"rerank", "information-gain re-ranking of candidates", cmd_rerank},
      {"answer", "score passages and predict answers", cmd_answer},
      {"evaluate", "compute accuracy and fact-recall counts", cmd_evaluate},
      {"run", "all stages end to end", [](const PipelineConfig& c) {
         auto r = run_pipeline(c);
         std::cout << render_report_table(std::span<const EvalReport>(&r.report, 1));
       }},
      {"grid", "sweep N and K, one report row each", [](const PipelineConfig& c) {
         std::cout << render_report_table(run_grid(c));
       }},
  };

  std::vector<Settings> settings(std::size(commands));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_settings(sub, settings[i]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) commands[i].run(resolve(subs[i], settings[i]));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
