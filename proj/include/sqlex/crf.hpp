// Linear-chain CRF over sparse binary features.
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sqlex/labels.hpp"
#include "sqlex/lattice.hpp"

namespace sqlex {

/// Interned feature names. Ids are assigned in first-seen order, so the
/// same training data always yields the same ids.
class FeatureTable {
 public:
  int intern(const std::string& name);
  /// -1 when unknown.
  int find(const std::string& name) const;
  std::size_t size() const { return names_.size(); }
  const std::string& name(int id) const { return names_.at(id); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

/// Active feature ids per token.
using SparseSequence = std::vector<std::vector<int>>;

struct CrfSequence {
  SparseSequence features;
  LabelSeq labels;
};

struct CrfOptions {
  double l2 = 0.1;
  int max_epochs = 50;
  double tolerance = 1e-5;
  int chunks = 8;  // gradient accumulation is split into this many jobs
};

struct CrfTrainReport {
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

class CrfModel {
 public:
  CrfModel() : CrfModel(LabelSet::roles(), FeatureTable{}) {}
  CrfModel(LabelSet labels, FeatureTable features);

  const LabelSet& labels() const { return labels_; }
  const FeatureTable& features() const { return features_; }
  std::size_t num_labels() const { return labels_.size(); }

  /// K x F; column f holds the per-label weights of feature f.
  Eigen::MatrixXd& emission_weights() { return emission_; }
  const Eigen::MatrixXd& emission_weights() const { return emission_; }
  /// Raw transition weights; forbidden entries are ignored.
  Eigen::MatrixXd& transition_weights() { return transition_; }
  Eigen::VectorXd& start_weights() { return start_; }
  Eigen::VectorXd& end_weights() { return end_; }

  Eigen::MatrixXd transitions() const;  // with -inf on forbidden entries
  Eigen::VectorXd start() const;
  Eigen::VectorXd end() const;
  const Eigen::MatrixXd& transition_mask() const { return mask_; }

  /// T x K emission scores for a feature sequence.
  Eigen::MatrixXd emissions(const SparseSequence& seq) const;

  /// Maps feature names to ids, dropping names the model never saw.
  SparseSequence map_features(
      const std::vector<std::vector<std::string>>& names) const;

  lattice::Path<double> decode(const SparseSequence& seq) const;
  std::vector<lattice::Path<double>> nbest(const SparseSequence& seq,
                                           std::size_t k) const;
  double score(const SparseSequence& seq, const LabelSeq& labels) const;
  double log_likelihood(const SparseSequence& seq,
                        const LabelSeq& labels) const;

  std::size_t num_parameters() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& params);

  void save(std::ostream& out) const;
  /// Throws Error("format") or Error("version").
  static CrfModel load(std::istream& in);

 private:
  LabelSet labels_;
  FeatureTable features_;
  Eigen::MatrixXd emission_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd start_;
  Eigen::VectorXd end_;
  Eigen::MatrixXd mask_;  // 0 allowed, -inf forbidden; row = previous label
  Eigen::VectorXd start_mask_;
};

/// Penalized conditional log-likelihood
///   sum_i log p(y_i | x_i) - l2 / 2 * |w|^2
/// and its gradient, as a function of the flattened parameter vector of a
/// model with a fixed label set and feature table.
class CrfObjective {
 public:
  CrfObjective(const CrfModel& shape, const std::vector<CrfSequence>& data,
               double l2, int chunks = 8);
  double operator()(const Eigen::VectorXd& params,
                    Eigen::VectorXd& grad) const;

 private:
  const CrfModel& shape_;
  const std::vector<CrfSequence>& data_;
  double l2_;
  int chunks_;
};

/// Builds the feature table from `names`, then fits the weights.
/// Throws Error("label") when a gold sequence is not BIO-valid or uses a
/// label outside the set.
CrfModel train_crf(const LabelSet& labels,
                   const std::vector<std::vector<std::vector<std::string>>>& names,
                   const std::vector<LabelSeq>& gold, const CrfOptions& options,
                   CrfTrainReport* report = nullptr);

/// Fits the weights of `model` in place on already-mapped sequences.
CrfTrainReport fit_crf(CrfModel& model, const std::vector<CrfSequence>& data,
                       const CrfOptions& options);

}  // namespace sqlex
