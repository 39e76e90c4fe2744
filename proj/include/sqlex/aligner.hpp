// Automatic role/span annotation by aligning the slots of a gold query to
// question tokens.
//
// Alignment runs in three passes over a shared token pool (a question token
// carries at most one role):
//   1. string matching of values and column names (exact, then trigram Dice),
//   2. a Model-1 style statistical aligner trained on question/SQL pairs,
//   3. a similarity fallback (edit distance, shared stems) for column slots.
// Label generation then turns the alignment into BIO role and span labels.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sqlex/labels.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

enum class SlotKind { kSelCol, kAgg, kCondCol, kOp, kValue };
enum class Provenance { kExact, kPartial, kEm, kFallback, kUnaligned };

std::string_view slot_kind_name(SlotKind kind);
std::string_view provenance_name(Provenance p);

struct AlignmentLink {
  SlotKind kind = SlotKind::kSelCol;
  int cond = -1;                        // condition index for per-condition slots
  std::vector<std::string> sql_tokens;  // canonical SQL-side tokens of the slot
  std::vector<std::size_t> tokens;      // aligned question tokens, ascending
  Provenance provenance = Provenance::kUnaligned;

  bool aligned() const { return provenance != Provenance::kUnaligned; }
};

struct Alignment {
  std::vector<AlignmentLink> links;

  /// Tokens already claimed by some slot.
  std::vector<bool> consumed(std::size_t num_tokens) const;
  const AlignmentLink* find(SlotKind kind, int cond = -1) const;
  nlohmann::json to_json() const;
};

/// Unaligned slots for the gold query: the select column, the aggregation
/// when it is not NONE, and per condition its column, its operator when it
/// is not '=', and its value. NONE and '=' are the defaults the assembler
/// falls back to, so they are never grounded.
Alignment make_slots(const Example& example, const TableSchema& schema);

/// First pass: exact, then partial (trigram Dice >= kPartialThreshold)
/// string matching of values and column names. Values are matched first.
Alignment string_match_pass(const Example& example, const TableSchema& schema);

inline constexpr double kPartialThreshold = 0.5;
inline constexpr double kFallbackThreshold = 0.5;
inline constexpr double kPosteriorFloor = 1e-6;
/// Largest gap between a condition slot and its value (or between the
/// aggregation and the select column) for the slot to be aligned there.
inline constexpr std::size_t kLocalWindow = 4;

/// Canonical SQL-side token sequence used as the "source" sentence of the
/// alignment corpus: agg keyword, select header words, then for every
/// condition its header words, op symbol and value words.
std::vector<std::string> sql_side_tokens(const SqlQuery& query,
                                         const TableSchema& schema);

/// Lowercased question tokens as used on the question side of the corpus.
std::vector<std::string> question_side_tokens(const Example& example);

struct ParallelPair {
  std::vector<std::string> question;
  std::vector<std::string> sql;
};

inline const std::string kNullToken = "<null>";

/// Translation table t(question word | sql word) estimated by EM. Every SQL
/// word (and the null word) carries a distribution over the question
/// vocabulary; pairs that never co-occurred share the smoothing mass.
class AlignmentModel {
 public:
  struct Options {
    int iterations = 5;
    double smoothing = 0.01;
  };

  /// Throws Error("input") on an empty corpus.
  static AlignmentModel train(const std::vector<ParallelPair>& corpus,
                              const Options& options);

  /// t(f | e); 0 when e is not in the model.
  double prob(std::string_view f, std::string_view e) const;
  bool has_source(std::string_view e) const;

  double log_likelihood(const std::vector<ParallelPair>& corpus) const;

  /// Log-likelihood of the training corpus before the first iteration and
  /// after each one.
  const std::vector<double>& history() const { return history_; }

  /// Sum over the question vocabulary of t(f | e).
  double row_mass(std::string_view e) const;

  const std::vector<std::string>& source_vocab() const { return source_; }
  const std::vector<std::string>& target_vocab() const { return target_; }

  void save(const std::filesystem::path& path) const;
  static AlignmentModel load(const std::filesystem::path& path);

 private:
  struct Row {
    std::unordered_map<int, double> probs;  // co-occurring targets
    double rest = 0.0;                      // probability of any other target
  };

  int source_id(std::string_view e) const;
  int target_id(std::string_view f) const;
  double prob_ids(int f, int e) const;

  std::vector<std::string> source_;
  std::vector<std::string> target_;
  std::unordered_map<std::string, int> source_index_;
  std::unordered_map<std::string, int> target_index_;
  std::vector<Row> rows_;
  std::vector<double> history_;
};

ParallelPair make_parallel_pair(const Example& example,
                                const TableSchema& schema);

/// Second pass. Each still-unaligned slot word e is aligned to the free
/// question token q with the largest alignment posterior
/// t(q | e) / sum_e' t(q | e') over the pair's SQL words and the null word,
/// restricted to tokens whose Viterbi source among the ungrounded words is
/// e and whose posterior is at least kPosteriorFloor. Aggregation and
/// operator slots grow to contiguous neighbours with the same Viterbi
/// source ("how many", "greater than").
/// Value slots are accepted only as a contiguous range. Function words
/// ("of", "in", "the", ...) are never aligned to non-value slots, here or in
/// the fallback.
Alignment em_align(const AlignmentModel& model, const Example& example,
                   const TableSchema& schema, const Alignment& residual);

/// Third pass for column and aggregation slots still unaligned: the free
/// word token maximizing max(edit similarity, stem similarity) against any
/// slot word. Below kFallbackThreshold the slot stays unaligned, which for
/// a condition column means an implicit mention.
Alignment similarity_fallback(const Example& example,
                              const Alignment& residual);

struct LabeledExample {
  Example example;
  LabelSeq roles;
  LabelSeq spans;
};

struct LabelOutcome {
  std::optional<LabeledExample> labeled;
  std::string drop_reason;  // empty when labeled
};

LabelOutcome generate_labels(const Example& example,
                             const Alignment& alignment);

struct AnnotationRecord {
  Example example;
  Alignment alignment;
  LabelOutcome outcome;
};

struct AnnotationReport {
  std::size_t total = 0;
  std::size_t annotated = 0;
  std::size_t dropped = 0;
  // slot kind -> provenance -> count
  std::map<std::string, std::map<std::string, std::size_t>> provenance;
  std::map<std::string, std::size_t> drop_reasons;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Runs the three passes and label generation for one example.
AnnotationRecord annotate_example(const AlignmentModel& model,
                                  const Example& example,
                                  const TableSchema& schema);

struct Annotation {
  std::vector<AnnotationRecord> records;
  AnnotationReport report;
};

/// Examples without gold or with an unknown table are reported as dropped.
Annotation annotate_corpus(const AlignmentModel& model,
                           const std::vector<Example>& examples,
                           const TableSet& tables);

/// Builds the alignment corpus from every example with a gold query and a
/// known table, and trains the aligner on it.
AlignmentModel train_em_aligner(const std::vector<Example>& corpus,
                                const TableSet& tables,
                                const AlignmentModel::Options& options);

/// JSONL annotation record:
/// {question, table_id, roles, spans, dropped, provenance}.
nlohmann::json annotation_to_json(const AnnotationRecord& record);

/// Reads back an annotation record. Dropped records yield nullopt.
std::optional<LabeledExample> labeled_from_json(const nlohmann::json& record);

}  // namespace sqlex
