// The extractor: two CRF chains (mention roles and relation spans) over one
// shared feature extraction.
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "sqlex/aligner.hpp"
#include "sqlex/crf.hpp"
#include "sqlex/features.hpp"

namespace sqlex {

struct TaggedCandidate {
  LabelSeq roles;
  LabelSeq spans;
  double score = 0.0;  // role path score + span path score
};

struct LabelerTrainReport {
  CrfTrainReport roles;
  CrfTrainReport spans;
};

class Labeler {
 public:
  Labeler() = default;
  Labeler(CrfModel roles, CrfModel spans)
      : roles_(std::move(roles)), spans_(std::move(spans)) {}

  /// Throws Error("input") on an empty corpus and Error("label") on labels
  /// outside the role/span sets or not BIO-valid. Tables are looked up by
  /// the example's table id; a missing table only disables cell features.
  static Labeler train(const std::vector<LabeledExample>& corpus,
                       const TableSet& tables, const CrfOptions& options,
                       LabelerTrainReport* report = nullptr);

  struct Prediction {
    LabelSeq roles;
    LabelSeq spans;
  };
  Prediction predict(const Example& example, const TableSchema& schema,
                     const Table* table = nullptr) const;

  /// Cross product of the k best role and span paths, scored by the sum of
  /// both path scores, best first, at most k * k entries.
  std::vector<TaggedCandidate> nbest(const Example& example,
                                     const TableSchema& schema,
                                     const Table* table, std::size_t k) const;

  const CrfModel& roles() const { return roles_; }
  const CrfModel& spans() const { return spans_; }

  /// Writes roles.crf and spans.crf into `dir`.
  void save(const std::filesystem::path& dir) const;
  static Labeler load(const std::filesystem::path& dir);

 private:
  CrfModel roles_{LabelSet::roles(), FeatureTable{}};
  CrfModel spans_{LabelSet::spans(), FeatureTable{}};
};

}  // namespace sqlex
