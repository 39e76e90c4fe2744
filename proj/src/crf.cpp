#include "sqlex/crf.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include "sqlex/optimize.hpp"
#include "sqlex/types.hpp"

namespace sqlex {
namespace {

constexpr std::string_view kMagic = "SQLEX-CRF";
constexpr int kVersion = 1;
constexpr double kNegInf = lattice::neg_inf<double>();

}  // namespace

int FeatureTable::intern(const std::string& name) {
  auto [it, inserted] = index_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

int FeatureTable::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

CrfModel::CrfModel(LabelSet labels, FeatureTable features)
    : labels_(std::move(labels)), features_(std::move(features)) {
  const auto K = static_cast<Eigen::Index>(labels_.size());
  emission_ = Eigen::MatrixXd::Zero(K, static_cast<Eigen::Index>(features_.size()));
  transition_ = Eigen::MatrixXd::Zero(K, K);
  start_ = Eigen::VectorXd::Zero(K);
  end_ = Eigen::VectorXd::Zero(K);
  mask_ = Eigen::MatrixXd::Zero(K, K);
  start_mask_ = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < K; ++i) {
    start_mask_(i) = LabelSet::allowed(-1, static_cast<int>(i)) ? 0.0 : kNegInf;
    for (Eigen::Index j = 0; j < K; ++j) {
      mask_(i, j) = LabelSet::allowed(static_cast<int>(i), static_cast<int>(j))
                        ? 0.0
                        : kNegInf;
    }
  }
}

Eigen::MatrixXd CrfModel::transitions() const { return transition_ + mask_; }
Eigen::VectorXd CrfModel::start() const { return start_ + start_mask_; }
Eigen::VectorXd CrfModel::end() const { return end_; }

Eigen::MatrixXd CrfModel::emissions(const SparseSequence& seq) const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(seq.size()), emission_.rows());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (int f : seq[t]) {
      e.row(static_cast<Eigen::Index>(t)) += emission_.col(f).transpose();
    }
  }
  return e;
}

SparseSequence CrfModel::map_features(
    const std::vector<std::vector<std::string>>& names) const {
  SparseSequence out(names.size());
  for (std::size_t t = 0; t < names.size(); ++t) {
    for (const auto& n : names[t]) {
      if (int id = features_.find(n); id >= 0) out[t].push_back(id);
    }
  }
  return out;
}

lattice::Path<double> CrfModel::decode(const SparseSequence& seq) const {
  return lattice::viterbi(emissions(seq), transitions(), start(), end());
}

std::vector<lattice::Path<double>> CrfModel::nbest(const SparseSequence& seq,
                                                   std::size_t k) const {
  return lattice::kbest(emissions(seq), transitions(), start(), end(), k);
}

double CrfModel::score(const SparseSequence& seq, const LabelSeq& labels) const {
  return lattice::sequence_score(emissions(seq), transitions(), start(), end(),
                                 labels);
}

double CrfModel::log_likelihood(const SparseSequence& seq,
                                const LabelSeq& labels) const {
  const Eigen::MatrixXd e = emissions(seq);
  const auto fb = lattice::forward_backward(e, transitions(), start(), end());
  return lattice::sequence_score(e, transitions(), start(), end(), labels) -
         fb.log_z;
}

std::size_t CrfModel::num_parameters() const {
  return static_cast<std::size_t>(emission_.size() + transition_.size() +
                                  start_.size() + end_.size());
}

Eigen::VectorXd CrfModel::parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index o = 0;
  p.segment(o, emission_.size()) = emission_.reshaped();
  o += emission_.size();
  p.segment(o, transition_.size()) = transition_.reshaped();
  o += transition_.size();
  p.segment(o, start_.size()) = start_;
  o += start_.size();
  p.segment(o, end_.size()) = end_;
  return p;
}

void CrfModel::set_parameters(const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != num_parameters()) {
    throw Error("input", "parameter vector has the wrong size");
  }
  Eigen::Index o = 0;
  emission_.reshaped() = p.segment(o, emission_.size());
  o += emission_.size();
  transition_.reshaped() = p.segment(o, transition_.size());
  o += transition_.size();
  start_ = p.segment(o, start_.size());
  o += start_.size();
  end_ = p.segment(o, end_.size());
  // Forbidden entries carry no weight.
  for (Eigen::Index i = 0; i < mask_.rows(); ++i) {
    if (start_mask_(i) == kNegInf) start_(i) = 0.0;
    for (Eigen::Index j = 0; j < mask_.cols(); ++j) {
      if (mask_(i, j) == kNegInf) transition_(i, j) = 0.0;
    }
  }
}

void CrfModel::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << kMagic << ' ' << kVersion << '\n';
  out << "labels " << labels_.num_types() << '\n';
  for (const auto& t : labels_.types()) out << t << '\n';
  out << "features " << features_.size() << '\n';
  for (std::size_t f = 0; f < features_.size(); ++f) {
    out << features_.name(static_cast<int>(f)) << '\n';
  }
  out << "start";
  for (Eigen::Index i = 0; i < start_.size(); ++i) out << ' ' << start_(i);
  out << "\nend";
  for (Eigen::Index i = 0; i < end_.size(); ++i) out << ' ' << end_(i);
  out << "\ntransitions";
  for (Eigen::Index i = 0; i < transition_.rows(); ++i) {
    for (Eigen::Index j = 0; j < transition_.cols(); ++j) {
      out << ' ' << transition_(i, j);
    }
  }
  std::size_t nonzero = 0;
  for (Eigen::Index f = 0; f < emission_.cols(); ++f) {
    for (Eigen::Index k = 0; k < emission_.rows(); ++k) {
      nonzero += emission_(k, f) != 0.0;
    }
  }
  out << "\nemissions " << nonzero << '\n';
  for (Eigen::Index f = 0; f < emission_.cols(); ++f) {
    for (Eigen::Index k = 0; k < emission_.rows(); ++k) {
      if (emission_(k, f) != 0.0) {
        out << f << ' ' << k << ' ' << emission_(k, f) << '\n';
      }
    }
  }
  out << "end-of-model\n";
}

CrfModel CrfModel::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) throw Error("format", "not a CRF model file");
  if (version != kVersion) {
    throw Error("version", "CRF model version " + std::to_string(version) +
                               ", expected " + std::to_string(kVersion));
  }
  auto expect = [&](std::string_view key) {
    std::string got;
    in >> got;
    if (got != key) {
      throw Error("format", "CRF model: expected '" + std::string(key) +
                                "', found '" + got + "'");
    }
  };
  std::size_t n = 0;
  expect("labels");
  in >> n;
  in.ignore();
  std::vector<std::string> types(n);
  for (auto& t : types) std::getline(in, t);
  expect("features");
  in >> n;
  in.ignore();
  FeatureTable features;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    std::getline(in, name);
    features.intern(name);
  }
  CrfModel model(LabelSet(types), std::move(features));
  expect("start");
  for (Eigen::Index i = 0; i < model.start_.size(); ++i) in >> model.start_(i);
  expect("end");
  for (Eigen::Index i = 0; i < model.end_.size(); ++i) in >> model.end_(i);
  expect("transitions");
  for (Eigen::Index i = 0; i < model.transition_.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.transition_.cols(); ++j) {
      in >> model.transition_(i, j);
    }
  }
  expect("emissions");
  in >> n;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index f = 0;
    Eigen::Index k = 0;
    double w = 0.0;
    in >> f >> k >> w;
    if (f < 0 || f >= model.emission_.cols() || k < 0 ||
        k >= model.emission_.rows()) {
      throw Error("format", "CRF model: emission index out of range");
    }
    model.emission_(k, f) = w;
  }
  expect("end-of-model");
  if (!in) throw Error("format", "CRF model: truncated file");
  return model;
}

CrfObjective::CrfObjective(const CrfModel& shape,
                           const std::vector<CrfSequence>& data, double l2,
                           int chunks)
    : shape_(shape), data_(data), l2_(l2), chunks_(std::max(1, chunks)) {}

double CrfObjective::operator()(const Eigen::VectorXd& params,
                                Eigen::VectorXd& grad) const {
  CrfModel model = shape_;
  model.set_parameters(params);
  const Eigen::MatrixXd trans = model.transitions();
  const Eigen::VectorXd start = model.start();
  const Eigen::VectorXd end = model.end();
  const Eigen::Index K = static_cast<Eigen::Index>(model.num_labels());
  const Eigen::Index F = model.emission_weights().cols();
  const Eigen::Index off_trans = K * F;
  const Eigen::Index off_start = off_trans + K * K;
  const Eigen::Index off_end = off_start + K;

  const std::size_t jobs =
      std::min<std::size_t>(static_cast<std::size_t>(chunks_), std::max<std::size_t>(1, data_.size()));
  std::vector<Eigen::VectorXd> grads(jobs);
  std::vector<double> values(jobs, 0.0);

  auto work = [&](std::size_t job) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(params.size());
    double value = 0.0;
    for (std::size_t i = job; i < data_.size(); i += jobs) {
      const auto& seq = data_[i];
      const Eigen::Index T = static_cast<Eigen::Index>(seq.labels.size());
      if (T == 0) continue;
      const Eigen::MatrixXd e = model.emissions(seq.features);
      const auto fb = lattice::forward_backward(e, trans, start, end);
      value += lattice::sequence_score(e, trans, start, end, seq.labels) - fb.log_z;

      // Node marginals drive emission, start and end gradients.
      const Eigen::MatrixXd node =
          (fb.alpha + fb.beta).array() - fb.log_z;
      const Eigen::MatrixXd p = node.array().exp();
      for (Eigen::Index t = 0; t < T; ++t) {
        const int gold = seq.labels[t];
        for (int f : seq.features[t]) {
          auto col = g.segment(static_cast<Eigen::Index>(f) * K, K);
          col -= p.row(t).transpose();
          col(gold) += 1.0;
        }
      }
      g.segment(off_start, K) -= p.row(0).transpose();
      g(off_start + seq.labels.front()) += 1.0;
      g.segment(off_end, K) -= p.row(T - 1).transpose();
      g(off_end + seq.labels.back()) += 1.0;

      for (Eigen::Index t = 1; t < T; ++t) {
        // edge(i, j) = alpha(t-1, i) + trans(i, j) + e(t, j) + beta(t, j) - logZ
        const Eigen::RowVectorXd right =
            e.row(t) + fb.beta.row(t) - Eigen::RowVectorXd::Constant(K, fb.log_z);
        Eigen::MatrixXd edge = trans;
        edge.colwise() += fb.alpha.row(t - 1).transpose();
        edge.rowwise() += right;
        Eigen::Map<Eigen::MatrixXd> gt(g.data() + off_trans, K, K);
        gt -= edge.array().exp().matrix();
        gt(seq.labels[t - 1], seq.labels[t]) += 1.0;
      }
    }
    grads[job] = std::move(g);
    values[job] = value;
  };

  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(work, j);
    for (auto& t : threads) t.join();
  }

  grad = Eigen::VectorXd::Zero(params.size());
  double value = 0.0;
  for (std::size_t j = 0; j < jobs; ++j) {
    grad += grads[j];
    value += values[j];
  }
  value -= 0.5 * l2_ * params.squaredNorm();
  grad -= l2_ * params;

  // Forbidden transitions are constants.
  const Eigen::MatrixXd& mask = model.transition_mask();
  const Eigen::VectorXd start_mask = model.start();
  for (Eigen::Index i = 0; i < K; ++i) {
    if (start_mask(i) == kNegInf) grad(off_start + i) = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (mask(i, j) == kNegInf) grad(off_trans + j * K + i) = 0.0;
    }
  }
  return value;
}

CrfTrainReport fit_crf(CrfModel& model, const std::vector<CrfSequence>& data,
                       const CrfOptions& options) {
  for (const auto& seq : data) {
    if (seq.features.size() != seq.labels.size()) {
      throw Error("input", "feature and label sequences differ in length");
    }
    for (int l : seq.labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= model.num_labels()) {
        throw Error("label", "label id outside the declared label set");
      }
    }
    if (!is_bio_valid(seq.labels)) {
      throw Error("label", "training labels are not BIO-valid");
    }
  }
  CrfObjective objective(model, data, options.l2, options.chunks);
  Eigen::VectorXd x = model.parameters();
  LbfgsOptions lo;
  lo.max_iterations = options.max_epochs;
  lo.relative_tolerance = options.tolerance;
  const auto res = lbfgs_maximize<double>(
      [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) { return objective(p, g); },
      x, lo);
  model.set_parameters(x);
  return {res.iterations, res.objective, res.converged};
}

CrfModel train_crf(const LabelSet& labels,
                   const std::vector<std::vector<std::vector<std::string>>>& names,
                   const std::vector<LabelSeq>& gold, const CrfOptions& options,
                   CrfTrainReport* report) {
  if (names.size() != gold.size()) {
    throw Error("input", "feature and label corpora differ in size");
  }
  if (names.empty()) throw Error("input", "empty training corpus");
  FeatureTable table;
  std::vector<CrfSequence> data(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    data[i].features.resize(names[i].size());
    for (std::size_t t = 0; t < names[i].size(); ++t) {
      for (const auto& n : names[i][t]) {
        data[i].features[t].push_back(table.intern(n));
      }
    }
    data[i].labels = gold[i];
  }
  CrfModel model(labels, std::move(table));
  const auto r = fit_crf(model, data, options);
  if (report) *report = r;
  return model;
}

}  // namespace sqlex
