// Limited-memory BFGS for smooth concave objectives (maximization).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <algorithm>
#include <deque>
#include <vector>

namespace sqlex {

struct LbfgsOptions {
  int max_iterations = 50;
  int history = 7;
  double relative_tolerance = 1e-5;  // on the objective value
  int max_line_search = 30;
};

struct LbfgsResult {
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

/// `fn(x, grad)` returns f(x) and writes the gradient. `x` is updated in
/// place. Backtracking line search with the Armijo condition.
template <typename Scalar, typename Fn>
LbfgsResult lbfgs_maximize(Fn&& fn,
                           Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                           const LbfgsOptions& options) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  // Work on -f so the textbook minimization update applies.
  Vec grad(x.size());
  Scalar f = -fn(x, grad);
  grad = -grad;

  std::deque<Vec> s_hist;
  std::deque<Vec> y_hist;
  std::deque<Scalar> rho_hist;
  LbfgsResult result;
  result.objective = -f;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // Two-loop recursion.
    Vec q = grad;
    std::vector<Scalar> a(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    Scalar gamma = 1;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else if (grad.norm() > 0) {
      gamma = Scalar(1) / grad.norm();
    }
    Vec dir = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const Scalar b = rho_hist[i] * y_hist[i].dot(dir);
      dir += s_hist[i] * (a[i] - b);
    }
    dir = -dir;
    Scalar slope = grad.dot(dir);
    if (!(slope < 0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad / std::max<Scalar>(grad.norm(), Scalar(1e-12));
      slope = grad.dot(dir);
      if (!(slope < 0)) {
        result.converged = true;
        break;
      }
    }

    Scalar step = 1;
    Vec x_new(x.size());
    Vec grad_new(x.size());
    Scalar f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_new = x + step * dir;
      f_new = -fn(x_new, grad_new);
      grad_new = -grad_new;
      if (std::isfinite(static_cast<double>(f_new)) &&
          f_new <= f + Scalar(1e-4) * step * slope) {
        accepted = true;
        break;
      }
      step *= Scalar(0.5);
    }
    ++result.iterations;
    if (!accepted) {
      result.converged = true;
      break;
    }

    Vec s = x_new - x;
    Vec y = grad_new - grad;
    const Scalar sy = s.dot(y);
    if (sy > Scalar(1e-10)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(Scalar(1) / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const Scalar change = std::abs(f - f_new) / std::max<Scalar>(std::abs(f), 1);
    x = x_new;
    grad = grad_new;
    f = f_new;
    result.objective = -f;
    if (change < options.relative_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace sqlex
