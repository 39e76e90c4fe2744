// Command-line front end: annotate, train, predict, eval, exec.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlex/corpus.hpp"
#include "sqlex/pipeline.hpp"

namespace {

struct Flags {
  std::string config, train, input, tables, model_dir, output;
  int em_iters = 0, crf_epochs = 0, k = 0, min_gain = 0;
  std::uint64_t seed = 0;
  bool eg = false, ae = false, oracle = false;

  CLI::Option* o_em = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_gain = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_model = nullptr;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--tables", f.tables, "tables JSONL");
  f.o_model = cmd->add_option("--model", f.model_dir, "model directory");
  cmd->add_option("-o,--output", f.output, "output path");
  f.o_em = cmd->add_option("--em-iters", f.em_iters, "EM iterations");
  f.o_epochs = cmd->add_option("--epochs", f.crf_epochs, "CRF training iterations");
  f.o_k = cmd->add_option("--k", f.k, "n-best size for execution guidance");
  f.o_gain = cmd->add_option("--min-gain", f.min_gain, "minimum net gain of an AGG rule");
  f.o_seed = cmd->add_option("--seed", f.seed, "random seed (recorded in the manifest)");
  cmd->add_flag("--eg", f.eg, "execution-guided candidate selection");
  cmd->add_flag("--ae", f.ae, "AGG correction rules");
  cmd->add_flag("--oracle", f.oracle, "evaluate with aligner labels instead of the extractor");
}

sqlex::PipelineConfig resolve(const Flags& f) {
  sqlex::PipelineConfig c;
  if (!f.config.empty()) {
    const auto j = nlohmann::json::parse(sqlex::read_file(f.config), nullptr, false);
    if (j.is_discarded()) throw sqlex::Error("config", "malformed JSON in " + f.config);
    c = sqlex::PipelineConfig::from_json(j);
  }
  if (!f.train.empty()) c.train = f.train;
  if (!f.input.empty()) c.input = f.input;
  if (!f.tables.empty()) c.tables = f.tables;
  if (f.o_model->count()) c.model_dir = f.model_dir;
  if (!f.output.empty()) c.output = f.output;
  if (f.o_em->count()) c.em_iters = f.em_iters;
  if (f.o_epochs->count()) c.crf_epochs = f.crf_epochs;
  if (f.o_k->count()) c.nbest_k = f.k;
  if (f.o_gain->count()) c.min_gain = f.min_gain;
  if (f.o_seed->count()) c.seed = f.seed;
  c.eg = c.eg || f.eg;
  c.ae = c.ae || f.ae;
  c.oracle = c.oracle || f.oracle;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlex: natural-language questions to single-table SQL"};
  app.require_subcommand(1);

  Flags annotate_f, train_f, predict_f, eval_f;
  auto* annotate = app.add_subcommand("annotate", "align gold queries to questions and write role/span labels");
  add_common(annotate, annotate_f);
  annotate->add_option("--train", annotate_f.train, "examples JSONL");

  auto* train = app.add_subcommand("train", "train aligner, extractor and AGG rules");
  add_common(train, train_f);
  train->add_option("--train", train_f.train, "training examples JSONL");

  auto* predict = app.add_subcommand("predict", "predict SQL for questions");
  add_common(predict, predict_f);
  predict->add_option("--input", predict_f.input, "examples JSONL");

  auto* eval = app.add_subcommand("eval", "score predictions (or the oracle pipeline)");
  add_common(eval, eval_f);
  eval->add_option("--input", eval_f.input, "predictions JSONL, or gold examples with --oracle");

  std::string exec_tables, exec_request;
  auto* exec = app.add_subcommand("exec", "execute a query against a table");
  exec->add_option("--tables", exec_tables, "tables JSONL")->required();
  exec->add_option("--query", exec_request,
                   R"(JSON request {"table_id": ..., "sql": {"sel", "agg", "conds"}})")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (annotate->parsed()) {
      const auto report = sqlex::cmd_annotate(resolve(annotate_f));
      std::cout << report.to_text();
    } else if (train->parsed()) {
      const auto s = sqlex::cmd_train(resolve(train_f));
      std::cout << s.annotation.to_text();
      std::cout << "role CRF iterations: " << s.labeler.roles.iterations
                << ", span CRF iterations: " << s.labeler.spans.iterations << "\n";
      std::cout << "AGG errors on training data: " << s.agg_errors_before << " -> "
                << s.agg_errors_after << "\n";
    } else if (predict->parsed()) {
      const auto n = sqlex::cmd_predict(resolve(predict_f));
      std::cout << "predicted " << n << " queries\n";
    } else if (eval->parsed()) {
      std::cout << sqlex::cmd_eval(resolve(eval_f)).to_text();
    } else if (exec->parsed()) {
      const auto request = nlohmann::json::parse(exec_request, nullptr, false);
      if (request.is_discarded()) throw sqlex::Error("parse", "malformed --query JSON");
      std::cout << sqlex::cmd_exec(exec_tables, request).dump(2) << "\n";
    }
  } catch (const sqlex::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 3;
  }
  return 0;
}
