// End-to-end orchestration: annotation, training, prediction, evaluation.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlex/aligner.hpp"
#include "sqlex/enhancer.hpp"
#include "sqlex/evaluate.hpp"
#include "sqlex/labeler.hpp"
#include "sqlex/linker.hpp"

namespace sqlex {

struct PipelineConfig {
  std::filesystem::path train;        // examples used by annotate/train
  std::filesystem::path input;        // examples used by predict/eval
  std::filesystem::path tables;
  std::filesystem::path model_dir = "model";
  std::filesystem::path output;       // annotations / predictions / report

  int em_iters = 5;
  double em_smoothing = 0.01;
  int crf_epochs = 50;
  double crf_l2 = 0.1;
  int nbest_k = 4;
  int link_per_slot = 4;
  bool eg = false;
  bool ae = false;
  bool oracle = false;
  int min_gain = 2;
  std::uint64_t seed = 1;

  /// Throws Error("config") on non-positive counts or unknown keys.
  void validate() const;
  /// Keys absent from `j` keep their value from `base`.
  static PipelineConfig from_json(const nlohmann::json& j, PipelineConfig base);
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Every trained artifact of the pipeline.
struct Models {
  AlignmentModel aligner;
  Labeler labeler;
  RuleList rules;

  /// model_dir/{aligner.model, roles.crf, spans.crf, rules.json, manifest.json}
  void save(const std::filesystem::path& dir, const PipelineConfig& config) const;
  /// Throws Error("version") when the manifest's format version differs.
  static Models load(const std::filesystem::path& dir);
};

inline constexpr int kModelFormatVersion = 1;

struct PredictOptions {
  bool eg = false;
  bool ae = false;
  std::size_t k = 4;
  LinkOptions link;
};

struct Prediction {
  std::optional<SqlQuery> query;
  std::vector<ScoredQuery> candidates;  // best first; empty when nothing linked
  std::string error;                    // why no candidate could be built
};

/// Extractor n-best (k > 1 only with EG), assembly, linking, optional EG and
/// optional AGG correction. Candidates are ordered by extractor rank, then
/// by link score, so the first candidate is always the EG-off prediction.
Prediction predict_example(const Models& models, const Example& example,
                           const Table& table, const PredictOptions& options);

/// Labels from the aligner instead of the extractor, then assembly, linking
/// and evaluation. Dropped or unassemblable examples count as wrong.
EvalReport oracle_pipeline(const AlignmentModel& aligner,
                           const std::vector<Example>& corpus,
                           const TableSet& tables, bool eg = false,
                           const LinkOptions& link = {});

/// Per-example predictions of the oracle pipeline (nullopt when dropped).
std::vector<std::optional<SqlQuery>> oracle_predictions(
    const AlignmentModel& aligner, const std::vector<Example>& corpus,
    const TableSet& tables, bool eg = false, const LinkOptions& link = {});

struct TrainSummary {
  AnnotationReport annotation;
  LabelerTrainReport labeler;
  std::size_t agg_errors_before = 0;
  std::size_t agg_errors_after = 0;
};

/// Trains the aligner, annotates, trains the extractor and mines AGG rules
/// from the extractor's own predictions on the training examples.
Models train_models(const std::vector<Example>& train, const TableSet& tables,
                    const PipelineConfig& config, TrainSummary* summary = nullptr);

// Subcommands. Each reads its inputs from the config and writes to
// config.output (or config.model_dir for train).
AnnotationReport cmd_annotate(const PipelineConfig& config);
TrainSummary cmd_train(const PipelineConfig& config);
std::size_t cmd_predict(const PipelineConfig& config);
EvalReport cmd_eval(const PipelineConfig& config);
/// Executes {"table_id", "sql"} against the tables file.
nlohmann::json cmd_exec(const std::filesystem::path& tables,
                        const nlohmann::json& request);

/// Loads examples and fails on records naming a table that is not loaded.
std::vector<Example> load_checked_examples(const std::filesystem::path& path,
                                           const TableSet& tables);

}  // namespace sqlex
