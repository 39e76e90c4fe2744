#include "sqlex/pipeline.hpp"

#include <algorithm>
#include <set>

#include "sqlex/assembler.hpp"
#include "sqlex/corpus.hpp"
#include "sqlex/executor.hpp"

namespace sqlex {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "train",    "input",        "tables",    "model_dir",     "output",
    "em_iters", "em_smoothing", "crf_epochs", "crf_l2",       "k",
    "link_per_slot", "eg",      "ae",        "oracle",        "min_gain",
    "seed"};

std::vector<std::string> lower_tokens(const Example& example) {
  std::vector<std::string> out;
  out.reserve(example.tokens.size());
  for (const auto& t : example.tokens) out.push_back(t.lower);
  return out;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error("config", std::string("missing path: ") + what);
}

fs::path output_or(const PipelineConfig& config, const fs::path& fallback) {
  return config.output.empty() ? fallback : config.output;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension(suffix);
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw Error("config", std::string(name) + " must be positive");
  };
  positive(em_iters, "em_iters");
  positive(crf_epochs, "crf_epochs");
  positive(nbest_k, "k");
  positive(link_per_slot, "link_per_slot");
  if (em_smoothing < 0) throw Error("config", "em_smoothing must be non-negative");
  if (crf_l2 < 0) throw Error("config", "crf_l2 must be non-negative");
}

PipelineConfig PipelineConfig::from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw Error("config", "configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) throw Error("config", "unknown key '" + key + "'");
  }
  try {
    if (j.contains("train")) c.train = j["train"].get<std::string>();
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("tables")) c.tables = j["tables"].get<std::string>();
    if (j.contains("model_dir")) c.model_dir = j["model_dir"].get<std::string>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    c.em_iters = j.value("em_iters", c.em_iters);
    c.em_smoothing = j.value("em_smoothing", c.em_smoothing);
    c.crf_epochs = j.value("crf_epochs", c.crf_epochs);
    c.crf_l2 = j.value("crf_l2", c.crf_l2);
    c.nbest_k = j.value("k", c.nbest_k);
    c.link_per_slot = j.value("link_per_slot", c.link_per_slot);
    c.eg = j.value("eg", c.eg);
    c.ae = j.value("ae", c.ae);
    c.oracle = j.value("oracle", c.oracle);
    c.min_gain = j.value("min_gain", c.min_gain);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error("config", e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  return from_json(j, PipelineConfig{});
}

json PipelineConfig::to_json() const {
  return json{{"train", train.string()},     {"input", input.string()},
              {"tables", tables.string()},   {"model_dir", model_dir.string()},
              {"output", output.string()},   {"em_iters", em_iters},
              {"em_smoothing", em_smoothing}, {"crf_epochs", crf_epochs},
              {"crf_l2", crf_l2},            {"k", nbest_k},
              {"link_per_slot", link_per_slot}, {"eg", eg},
              {"ae", ae},                    {"oracle", oracle},
              {"min_gain", min_gain},        {"seed", seed}};
}

void Models::save(const fs::path& dir, const PipelineConfig& config) const {
  fs::create_directories(dir);
  aligner.save(dir / "aligner.model");
  labeler.save(dir);
  write_file(dir / "rules.json", rules_to_json(rules).dump(2) + "\n");
  json manifest{{"format_version", kModelFormatVersion}, {"config", config.to_json()}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Models Models::load(const fs::path& dir) {
  const json manifest = json::parse(read_file(dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw Error("parse", "unreadable manifest in " + dir.string());
  }
  const int version = manifest.value("format_version", -1);
  if (version != kModelFormatVersion) {
    throw Error("version", "model format " + std::to_string(version) +
                               ", expected " + std::to_string(kModelFormatVersion));
  }
  Models m;
  m.aligner = AlignmentModel::load(dir / "aligner.model");
  m.labeler = Labeler::load(dir);
  const json rules = json::parse(read_file(dir / "rules.json"), nullptr, false);
  if (rules.is_discarded()) throw Error("parse", "unreadable rules.json");
  m.rules = rules_from_json(rules);
  return m;
}

Prediction predict_example(const Models& models, const Example& example,
                           const Table& table, const PredictOptions& options) {
  Prediction out;
  const std::size_t k = options.eg ? std::max<std::size_t>(options.k, 1) : 1;
  const auto tagged = models.labeler.nbest(example, table.schema, &table, k);

  std::vector<SqlQuery> seen;
  for (const auto& cand : tagged) {
    std::vector<ScoredQuery> linked;
    try {
      const PseudoSql pseudo = assemble(example, cand.roles, cand.spans);
      linked = link(pseudo, table.schema, &table, example.question, options.link);
    } catch (const Error& e) {
      if (out.error.empty()) out.error = e.what();
      continue;
    }
    for (auto& sq : linked) {
      if (std::find(seen.begin(), seen.end(), sq.query) != seen.end()) continue;
      seen.push_back(sq.query);
      sq.score += cand.score;
      out.candidates.push_back(std::move(sq));
    }
    if (!options.eg && !out.candidates.empty()) break;
  }
  if (out.candidates.empty()) return out;

  SqlQuery chosen = options.eg ? eg_select(out.candidates, table).query
                               : out.candidates.front().query;
  if (options.ae) chosen.agg = apply_rules(models.rules, lower_tokens(example), chosen.agg);
  out.query = std::move(chosen);
  return out;
}

std::vector<std::optional<SqlQuery>> oracle_predictions(
    const AlignmentModel& aligner, const std::vector<Example>& corpus,
    const TableSet& tables, bool eg, const LinkOptions& link_options) {
  std::vector<std::optional<SqlQuery>> preds;
  preds.reserve(corpus.size());
  for (const auto& ex : corpus) {
    const Table* table = tables.find(ex.table_id);
    if (!table || !ex.gold) {
      preds.emplace_back();
      continue;
    }
    const AnnotationRecord rec = annotate_example(aligner, ex, table->schema);
    if (!rec.outcome.labeled) {
      preds.emplace_back();
      continue;
    }
    try {
      const auto& lab = *rec.outcome.labeled;
      const PseudoSql pseudo = assemble(ex, lab.roles, lab.spans);
      const auto cands = link(pseudo, table->schema, table, ex.question, link_options);
      preds.emplace_back(eg ? eg_select(cands, *table).query : cands.front().query);
    } catch (const Error&) {
      preds.emplace_back();
    }
  }
  return preds;
}

EvalReport oracle_pipeline(const AlignmentModel& aligner,
                           const std::vector<Example>& corpus,
                           const TableSet& tables, bool eg,
                           const LinkOptions& link_options) {
  return evaluate(oracle_predictions(aligner, corpus, tables, eg, link_options),
                  corpus, tables, EvalMode::kOracle);
}

Models train_models(const std::vector<Example>& train, const TableSet& tables,
                    const PipelineConfig& config, TrainSummary* summary) {
  Models m;
  m.aligner = train_em_aligner(train, tables, {config.em_iters, config.em_smoothing});
  const Annotation ann = annotate_corpus(m.aligner, train, tables);

  std::vector<LabeledExample> labeled;
  for (const auto& rec : ann.records) {
    if (rec.outcome.labeled) labeled.push_back(*rec.outcome.labeled);
  }
  CrfOptions crf;
  crf.l2 = config.crf_l2;
  crf.max_epochs = config.crf_epochs;
  LabelerTrainReport lrep;
  m.labeler = Labeler::train(labeled, tables, crf, &lrep);

  std::vector<AggItem> items;
  for (const auto& ex : train) {
    const Table* table = tables.find(ex.table_id);
    if (!table || !ex.gold) continue;
    int predicted = kAggNone;
    const auto p = m.labeler.predict(ex, table->schema, table);
    try {
      predicted = assemble(ex, p.roles, p.spans).agg;
    } catch (const Error&) {
    }
    items.push_back({lower_tokens(ex), predicted, ex.gold->agg});
  }
  MiningTrace trace;
  m.rules = mine_rules(items, config.min_gain, &trace);

  if (summary) {
    summary->annotation = ann.report;
    summary->labeler = lrep;
    summary->agg_errors_before = trace.initial_errors;
    summary->agg_errors_after =
        trace.errors_after_rule.empty() ? trace.initial_errors : trace.errors_after_rule.back();
  }
  return m;
}

std::vector<Example> load_checked_examples(const fs::path& path, const TableSet& tables) {
  LoadResult loaded = load_examples(path);
  for (const auto& ex : loaded.examples) {
    if (!tables.find(ex.table_id)) {
      throw Error("input", "unknown table '" + ex.table_id + "' in " + path.string());
    }
  }
  return std::move(loaded.examples);
}

AnnotationReport cmd_annotate(const PipelineConfig& config) {
  require_path(config.train, "train");
  require_path(config.tables, "tables");
  const TableSet tables = load_tables(config.tables);
  const auto examples = load_examples(config.train).examples;
  const AlignmentModel model =
      train_em_aligner(examples, tables, {config.em_iters, config.em_smoothing});
  const Annotation ann = annotate_corpus(model, examples, tables);

  const fs::path out = output_or(config, "annotations.jsonl");
  std::vector<json> lines;
  lines.reserve(ann.records.size());
  for (const auto& rec : ann.records) lines.push_back(annotation_to_json(rec));
  write_jsonl(out, lines);
  write_file(sibling(out, ".report.json"), ann.report.to_json().dump(2) + "\n");
  write_file(sibling(out, ".report.txt"), ann.report.to_text());
  return ann.report;
}

TrainSummary cmd_train(const PipelineConfig& config) {
  require_path(config.train, "train");
  require_path(config.tables, "tables");
  const TableSet tables = load_tables(config.tables);
  const auto examples = load_examples(config.train).examples;
  TrainSummary summary;
  const Models models = train_models(examples, tables, config, &summary);
  models.save(config.model_dir, config);
  return summary;
}

std::size_t cmd_predict(const PipelineConfig& config) {
  require_path(config.input, "input");
  require_path(config.tables, "tables");
  const TableSet tables = load_tables(config.tables);
  const auto examples = load_checked_examples(config.input, tables);
  const Models models = Models::load(config.model_dir);

  PredictOptions opts;
  opts.eg = config.eg;
  opts.ae = config.ae;
  opts.k = static_cast<std::size_t>(config.nbest_k);
  opts.link.per_slot = static_cast<std::size_t>(config.link_per_slot);

  std::vector<json> lines;
  lines.reserve(examples.size());
  for (const auto& ex : examples) {
    const Prediction p = predict_example(models, ex, tables.at(ex.table_id), opts);
    json line = example_to_json(ex);
    if (p.query) {
      line["pred_sql"] = query_to_json(*p.query);
    } else {
      // Keep one query per input: an unconditioned select of the first column.
      line["pred_sql"] = query_to_json(SqlQuery{});
      line["pred_error"] = p.error.empty() ? "no candidate" : p.error;
    }
    lines.push_back(std::move(line));
  }
  write_jsonl(output_or(config, "predictions.jsonl"), lines);
  return lines.size();
}

EvalReport cmd_eval(const PipelineConfig& config) {
  require_path(config.input, "input");
  require_path(config.tables, "tables");
  const TableSet tables = load_tables(config.tables);
  EvalReport report;
  if (config.oracle) {
    const auto examples = load_checked_examples(config.input, tables);
    const AlignmentModel aligner =
        fs::exists(config.model_dir / "aligner.model")
            ? AlignmentModel::load(config.model_dir / "aligner.model")
            : train_em_aligner(examples, tables, {config.em_iters, config.em_smoothing});
    LinkOptions link_options;
    link_options.per_slot = static_cast<std::size_t>(config.link_per_slot);
    report = oracle_pipeline(aligner, examples, tables, config.eg, link_options);
  } else {
    std::vector<Example> gold;
    std::vector<std::optional<SqlQuery>> preds;
    for (const auto& line : read_jsonl(config.input)) {
      Example ex = parse_example(line);
      if (!ex.gold) throw Error("input", "evaluation record without gold sql");
      if (!tables.find(ex.table_id)) {
        throw Error("input", "unknown table '" + ex.table_id + "'");
      }
      if (line.contains("pred_sql") && !line["pred_sql"].is_null() &&
          !line.contains("pred_error")) {
        preds.push_back(query_from_json(line["pred_sql"]));
      } else {
        preds.emplace_back();
      }
      gold.push_back(std::move(ex));
    }
    report = evaluate(preds, gold, tables, config.eg ? EvalMode::kEg : EvalMode::kPlain);
  }
  if (!config.output.empty()) {
    write_file(config.output, report.to_json().dump(2) + "\n");
    write_file(sibling(config.output, ".txt"), report.to_text());
  }
  return report;
}

json cmd_exec(const fs::path& tables_path, const json& request) {
  const TableSet tables = load_tables(tables_path);
  if (!request.is_object() || !request.contains("table_id") || !request.contains("sql")) {
    throw Error("input", "request needs 'table_id' and 'sql'");
  }
  const std::string id = request["table_id"].get<std::string>();
  const Table* table = tables.find(id);
  if (!table) throw Error("input", "unknown table '" + id + "'");
  const SqlQuery q = query_from_json(request["sql"]);
  json out{{"table_id", id},
           {"sql", query_to_json(q)},
           {"sql_text", to_sql_string(q, table->schema)},
           {"result", result_to_json(execute(q, *table))}};
  return out;
}

}  // namespace sqlex
