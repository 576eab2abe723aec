#pragma once

// Slow reference solvers that share no code path with the closed-form
// routines they check. Eigen supplies every eigendecomposition here.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "trackex/matrix.hpp"
#include "trackex/simplex.hpp"

namespace trackex::oracle {

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
};

/// Euclidean projection onto {x >= lower_i, sum x = 1} by bisection on the
/// shift theta in x_i = max(lower_i, v_i - theta).
inline std::vector<double> euclidean_project_floor(std::span<const double> v, std::span<const double> lower) {
  const std::size_t k = v.size();
  auto mass = [&](double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::max(lower[i], v[i] - theta);
    return s;
  };
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = std::max(lower[i], v[i] - theta);
  return x;
}

/// argmin_{w >= f, sum w = 1} sum_i w_i log(w_i / y_i) for y > 0, by
/// projected Newton steps (the Hessian diag(1/w) is exact for this
/// separable objective), Armijo backtracking, and a fraction-to-boundary
/// rule keeping iterates strictly above the floor until they settle there.
/// Stops when the KKT residual max_i |min(w_i - f, g_i - nu)| < tol.
inline std::vector<double> kl_project(std::span<const double> y, double f, SolveInfo* info = nullptr,
                                      double tol = 1e-12, int max_iter = 10000) {
  const std::size_t k = y.size();
  if (k == 0) throw std::invalid_argument("oracle::kl_project: empty input");
  for (double v : y)
    if (!(v > 0.0)) throw std::domain_error("oracle::kl_project: y must be positive");
  std::vector<double> w(k, 1.0 / static_cast<double>(k));
  if (f * static_cast<double>(k) >= 1.0 - 1e-15) return w;

  auto objective = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += x[i] * std::log(x[i] / y[i]);
    return s;
  };
  auto gradient = [&](const std::vector<double>& x) {
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = std::log(x[i] / y[i]) + 1.0;
    return g;
  };
  auto kkt = [&](const std::vector<double>& x, const std::vector<double>& g) {
    const std::size_t top = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
    const double nu = g[top];
    double r = 0.0;
    for (std::size_t i = 0; i < k; ++i) r = std::max(r, std::abs(std::min(x[i] - f, g[i] - nu)));
    return r;
  };

  int it = 0;
  double res = 0.0;
  for (; it < max_iter; ++it) {
    const auto g = gradient(w);
    res = kkt(w, g);
    if (res < tol) break;
    // Scaled projection: x_i = max(l_i, w_i - w_i (g_i - mu)), sum x = 1.
    std::vector<double> lower(k), scaled(k);
    for (std::size_t i = 0; i < k; ++i) {
      lower[i] = f + 0.1 * (w[i] - f);
      scaled[i] = w[i] * (1.0 - g[i]);
    }
    auto mass = [&](double mu) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += std::max(lower[i], scaled[i] + w[i] * mu);
      return s;
    };
    double lo = -1.0, hi = 1.0;
    while (mass(lo) > 1.0) lo *= 2.0;
    while (mass(hi) < 1.0) hi *= 2.0;
    for (int b = 0; b < 200; ++b) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (mass(mid) < 1.0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> target(k);
    double tsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      target[i] = std::max(lower[i], scaled[i] + w[i] * mu);
      tsum += target[i];
    }
    for (double& x : target) x /= tsum;

    const double f0 = objective(w);
    double slope = 0.0;
    for (std::size_t i = 0; i < k; ++i) slope += g[i] * (target[i] - w[i]);
    double step = 1.0;
    std::vector<double> trial(k);
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < k; ++i) trial[i] = w[i] + step * (target[i] - w[i]);
      if (objective(trial) <= f0 + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (trial == w) break;
    w = trial;
  }
  if (info) *info = {it, res};
  return w;
}

using Mat = Eigen::MatrixXd;

inline Mat to_eigen(const Matrix& m) {
  Mat out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return out;
}

inline Mat spectral(const Mat& a, double (*fn)(double)) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Eigen::VectorXd d = es.eigenvalues().unaryExpr(fn);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// argmin over {W PSD, tr W = 1, lambda_min(W) >= f} of
/// tr(W log W) - tr(W log P), by projected gradient in the full matrix
/// space with Frobenius projections and backtracking. Returns the
/// eigenvalues of the minimizer in descending order.
inline std::vector<double> vn_project_eigenvalues(const Matrix& p, double f, SolveInfo* info = nullptr,
                                                  double tol = 1e-12, int max_iter = 20000) {
  const Eigen::Index k = static_cast<Eigen::Index>(p.size());
  const Mat log_p = spectral(to_eigen(p), [](double x) { return std::log(x); });
  const std::vector<double> lower(static_cast<std::size_t>(k), f);

  auto project = [&](const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + k);
    const auto x = euclidean_project_floor(v, lower);
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(x.data(), k);
    return Mat(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
  };
  auto objective = [&](const Mat& w) {
    Eigen::SelfAdjointEigenSolver<Mat> es(w);
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) s += es.eigenvalues()(i) * std::log(es.eigenvalues()(i));
    return s - (w * log_p).trace();
  };
  auto gradient = [&](const Mat& w) {
    return Mat(spectral(w, [](double x) { return std::log(x); }) - log_p);
  };

  Mat w = Mat::Identity(k, k) / static_cast<double>(k);
  double step = 1.0;
  int it = 0;
  double change = 0.0;
  for (; it < max_iter; ++it) {
    const Mat g = gradient(w);
    const double f0 = objective(w);
    Mat next;
    step = std::min(1.0, 2.0 * step);
    for (int bt = 0; bt < 60; ++bt) {
      next = project(w - step * g);
      const Mat d = next - w;
      const double model = f0 + (g.cwiseProduct(d)).sum() + d.squaredNorm() / (2.0 * step);
      if (objective(next) <= model + 1e-15) break;
      step *= 0.5;
    }
    change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (change < tol) break;
  }
  if (info) *info = {it, change};
  Eigen::SelfAdjointEigenSolver<Mat> es(w);
  std::vector<double> values(es.eigenvalues().data(), es.eigenvalues().data() + k);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

/// Eigenvalues (descending) of a symmetric matrix via Eigen.
inline std::vector<double> eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(to_eigen(a), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// Minimum total loss over all K^T sequences with at most S-1 switches.
inline double brute_force_switching(std::span<const LossVector> losses, int S) {
  const std::size_t T = losses.size();
  const std::size_t K = losses.front().size();
  std::vector<std::size_t> seq(T, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    int switches = 0;
    double cost = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (t > 0 && seq[t] != seq[t - 1]) ++switches;
      cost += losses[t][seq[t]];
    }
    if (switches <= S - 1) best = std::min(best, cost);
    std::size_t pos = 0;
    while (pos < T && ++seq[pos] == K) seq[pos++] = 0;
    if (pos == T) break;
  }
  return best;
}

/// Minimum over all segmentations into at most S contiguous pieces of the
/// summed per-piece minimum eigenvalue, by enumerating breakpoint subsets.
inline double brute_force_matrix(std::span<const LossMatrix> losses, int S) {
  const std::size_t T = losses.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (T - 1)); ++mask) {
    if (std::popcount(mask) > S - 1) continue;
    double cost = 0.0;
    Mat acc = Mat::Zero(static_cast<Eigen::Index>(losses[0].size()), static_cast<Eigen::Index>(losses[0].size()));
    for (std::size_t t = 0; t < T; ++t) {
      acc += to_eigen(losses[t].matrix().matrix());
      const bool cut = t + 1 == T || ((mask >> t) & 1U);
      if (cut) {
        Eigen::SelfAdjointEigenSolver<Mat> es(acc, Eigen::EigenvaluesOnly);
        cost += es.eigenvalues().minCoeff();
        acc.setZero();
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace trackex::oracle
