// Linear-chain lattice algorithms over dense potentials.
//
// Every routine takes the same four potentials as Eigen expressions:
//   emissions   T x K   score of label k at position t
//   transitions K x K   score of (previous label, next label)
//   start       K       score of the first label
//   end         K       score of the last label
// Forbidden transitions carry -infinity. Ties in decoding resolve to the
// lowest label index.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sqlex::lattice {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// log(sum(exp(v))) that tolerates -inf entries.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (m == neg_inf<Scalar>()) return m;
  return m + std::log((v.array() - m).exp().sum());
}

template <typename Scalar>
struct ForwardBackward {
  Matrix<Scalar> alpha;  // T x K, includes emission at t
  Matrix<Scalar> beta;   // T x K, excludes emission at t
  Scalar log_z = 0;
};

template <typename DE, typename DT, typename DS, typename DN>
ForwardBackward<typename DE::Scalar> forward_backward(
    const Eigen::MatrixBase<DE>& emissions,
    const Eigen::MatrixBase<DT>& transitions,
    const Eigen::MatrixBase<DS>& start, const Eigen::MatrixBase<DN>& end) {
  using Scalar = typename DE::Scalar;
  const Eigen::Index T = emissions.rows();
  const Eigen::Index K = emissions.cols();
  ForwardBackward<Scalar> fb;
  fb.alpha.resize(T, K);
  fb.beta.resize(T, K);
  if (T == 0) return fb;
  fb.alpha.row(0) = start.transpose() + emissions.row(0);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index k = 0; k < K; ++k) {
      fb.alpha(t, k) =
          log_sum_exp(fb.alpha.row(t - 1).transpose() + transitions.col(k)) +
          emissions(t, k);
    }
  }
  fb.beta.row(T - 1) = end.transpose();
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const RowVector<Scalar> next = emissions.row(t + 1) + fb.beta.row(t + 1);
    for (Eigen::Index j = 0; j < K; ++j) {
      fb.beta(t, j) = log_sum_exp(transitions.row(j) + next);
    }
  }
  fb.log_z = log_sum_exp(fb.alpha.row(T - 1) + end.transpose());
  return fb;
}

/// Unnormalized log-potential of a label sequence.
template <typename DE, typename DT, typename DS, typename DN>
typename DE::Scalar sequence_score(const Eigen::MatrixBase<DE>& emissions,
                                   const Eigen::MatrixBase<DT>& transitions,
                                   const Eigen::MatrixBase<DS>& start,
                                   const Eigen::MatrixBase<DN>& end,
                                   const std::vector<int>& labels) {
  using Scalar = typename DE::Scalar;
  if (labels.empty()) return Scalar(0);
  Scalar s = start(labels[0]) + emissions(0, labels[0]);
  for (std::size_t t = 1; t < labels.size(); ++t) {
    s += transitions(labels[t - 1], labels[t]) +
         emissions(static_cast<Eigen::Index>(t), labels[t]);
  }
  return s + end(labels.back());
}

template <typename Scalar>
struct Path {
  std::vector<int> labels;
  Scalar score = 0;
};

/// k best label sequences by score, best first. k = 1 is Viterbi.
/// Sequences containing a -inf potential are never returned.
template <typename DE, typename DT, typename DS, typename DN>
std::vector<Path<typename DE::Scalar>> kbest(
    const Eigen::MatrixBase<DE>& emissions,
    const Eigen::MatrixBase<DT>& transitions,
    const Eigen::MatrixBase<DS>& start, const Eigen::MatrixBase<DN>& end,
    std::size_t k) {
  using Scalar = typename DE::Scalar;
  struct Entry {
    Scalar score;
    int prev;
    int rank;
  };
  auto better = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.prev != b.prev) return a.prev < b.prev;
    return a.rank < b.rank;
  };
  const Eigen::Index T = emissions.rows();
  const int K = static_cast<int>(emissions.cols());
  std::vector<Path<Scalar>> out;
  if (T == 0 || k == 0) {
    if (T == 0 && k > 0) out.push_back({});
    return out;
  }

  // table[t][label] holds up to k entries, best first.
  std::vector<std::vector<std::vector<Entry>>> table(
      T, std::vector<std::vector<Entry>>(K));
  for (int j = 0; j < K; ++j) {
    const Scalar s = start(j) + emissions(0, j);
    if (s != neg_inf<Scalar>()) table[0][j].push_back({s, -1, 0});
  }
  std::vector<Entry> pool;
  for (Eigen::Index t = 1; t < T; ++t) {
    for (int j = 0; j < K; ++j) {
      pool.clear();
      for (int i = 0; i < K; ++i) {
        const Scalar tr = transitions(i, j);
        if (tr == neg_inf<Scalar>()) continue;
        const auto& prev = table[t - 1][i];
        for (std::size_t r = 0; r < prev.size(); ++r) {
          pool.push_back({prev[r].score + tr + emissions(t, j), i,
                          static_cast<int>(r)});
        }
      }
      const std::size_t keep = std::min(k, pool.size());
      std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(), better);
      table[t][j].assign(pool.begin(), pool.begin() + keep);
    }
  }
  pool.clear();
  for (int j = 0; j < K; ++j) {
    if (end(j) == neg_inf<Scalar>()) continue;
    const auto& last = table[T - 1][j];
    for (std::size_t r = 0; r < last.size(); ++r) {
      pool.push_back({last[r].score + end(j), j, static_cast<int>(r)});
    }
  }
  const std::size_t keep = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(), better);
  for (std::size_t n = 0; n < keep; ++n) {
    Path<Scalar> path;
    path.score = pool[n].score;
    path.labels.resize(T);
    int label = pool[n].prev;
    int rank = pool[n].rank;
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      path.labels[t] = label;
      const Entry& e = table[t][label][rank];
      label = e.prev;
      rank = e.rank;
    }
    out.push_back(std::move(path));
  }
  return out;
}

template <typename DE, typename DT, typename DS, typename DN>
Path<typename DE::Scalar> viterbi(const Eigen::MatrixBase<DE>& emissions,
                                  const Eigen::MatrixBase<DT>& transitions,
                                  const Eigen::MatrixBase<DS>& start,
                                  const Eigen::MatrixBase<DN>& end) {
  auto paths = kbest(emissions, transitions, start, end, 1);
  if (paths.empty()) return {};
  return std::move(paths.front());
}

}  // namespace sqlex::lattice
