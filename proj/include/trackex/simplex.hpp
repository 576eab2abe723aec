#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trackex {

// ── Errors ──────────────────────────────────────────────────────────

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The clipped feasible set is empty (floor * K > 1) or a parameter is out of range.
struct infeasible_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ── Tolerances ──────────────────────────────────────────────────────

inline constexpr double kSumTolerance = 1e-12;
inline constexpr double kEntryTolerance = -1e-15;

// ── Distribution ────────────────────────────────────────────────────

/// A point on the K-simplex. Construction validates non-negativity (to
/// -1e-15) and unit sum (to 1e-12); tiny negative entries are zeroed.
class Distribution {
 public:
  Distribution() = default;

  explicit Distribution(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw dimension_error("Distribution: empty weight vector");
    double sum = 0.0;
    for (double& x : w_) {
      if (!(x >= kEntryTolerance))
        throw std::invalid_argument("Distribution: negative or NaN entry " + std::to_string(x));
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw std::invalid_argument("Distribution: entries sum to " + std::to_string(sum));
  }

  static Distribution uniform(std::size_t k) {
    if (k == 0) throw dimension_error("Distribution::uniform: K must be positive");
    return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  static Distribution one_hot(std::size_t k, std::size_t index) {
    if (index >= k) throw dimension_error("Distribution::one_hot: index out of range");
    std::vector<double> w(k, 0.0);
    w[index] = 1.0;
    return Distribution(std::move(w));
  }

  /// Divides a non-negative vector by its sum, pinning the sum to one.
  static Distribution normalized(std::vector<double> v) {
    double sum = 0.0;
    for (double x : v) {
      if (!(x >= 0.0)) throw std::invalid_argument("Distribution::normalized: negative or NaN entry");
      sum += x;
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
      throw std::invalid_argument("Distribution::normalized: sum must be positive and finite");
    for (double& x : v) x /= sum;
    return Distribution(std::move(v));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const noexcept { return w_; }
  const std::vector<double>& vec() const noexcept { return w_; }

  double min() const {
    double m = w_.front();
    for (double x : w_) m = std::min(m, x);
    return m;
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> w_;
};

// ── LossVector ──────────────────────────────────────────────────────

class LossVector {
 public:
  LossVector() = default;

  explicit LossVector(std::vector<double> losses) : l_(std::move(losses)) {
    if (l_.empty()) throw dimension_error("LossVector: empty");
    for (double x : l_)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("LossVector: entry outside [0,1]: " + std::to_string(x));
  }

  static LossVector zeros(std::size_t k) { return LossVector(std::vector<double>(k, 0.0)); }

  std::size_t size() const noexcept { return l_.size(); }
  double operator[](std::size_t i) const { return l_[i]; }
  std::span<const double> losses() const noexcept { return l_; }
  const std::vector<double>& vec() const noexcept { return l_; }

  friend bool operator==(const LossVector&, const LossVector&) = default;

 private:
  std::vector<double> l_;
};

// ── HorizonConfig ───────────────────────────────────────────────────

/// Horizon T, experts K, segment budget S and learning rate. The clip
/// floor S/(TK) is derived, so floor * K = S/T <= 1 whenever S <= T.
struct HorizonConfig {
  int T = 1;
  int K = 2;
  int S = 1;
  double eta = 0.1;

  HorizonConfig() = default;
  HorizonConfig(int t, int k, int s, double learning_rate) : T(t), K(k), S(s), eta(learning_rate) {
    validate();
  }

  double clip_floor() const noexcept {
    return static_cast<double>(S) / (static_cast<double>(T) * static_cast<double>(K));
  }

  /// log(KT/S), the per-segment divergence budget shared by every bound.
  double log_term() const noexcept {
    return std::log(static_cast<double>(K) * static_cast<double>(T) / static_cast<double>(S));
  }

  void validate() const {
    if (T < 1) throw std::invalid_argument("HorizonConfig: T must be positive");
    if (K < 2) throw std::invalid_argument("HorizonConfig: K must be at least 2");
    if (S < 1 || S > T) throw infeasible_error("HorizonConfig: need 1 <= S <= T");
    if (!(eta > 0.0) || !std::isfinite(eta))
      throw std::invalid_argument("HorizonConfig: eta must be positive and finite");
  }
};

// ── Entropy and divergence ──────────────────────────────────────────

/// sum_i w_i log w_i with 0 log 0 = 0.
inline double negative_entropy(const Distribution& w) {
  double acc = 0.0;
  for (double x : w.weights())
    if (x > 0.0) acc += x * std::log(x);
  return acc;
}

/// Bregman divergence of the negative entropy between two distributions:
/// sum_i x_i log(x_i / y_i). Throws std::domain_error if y_i = 0 < x_i.
inline double kl_divergence(const Distribution& x, const Distribution& y) {
  if (x.size() != y.size()) throw dimension_error("kl_divergence: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0) continue;
    if (y[i] <= 0.0) throw std::domain_error("kl_divergence: y has zero mass where x is positive");
    acc += x[i] * std::log(x[i] / y[i]);
  }
  return acc;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw dimension_error("dot: dimension mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double weighted_loss(const Distribution& w, const LossVector& l) {
  if (w.size() != l.size()) throw dimension_error("weighted_loss: dimension mismatch");
  return dot(w.weights(), l.losses());
}

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw dimension_error("linf_distance: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double linf_norm_diff_sq(const LossVector& a, const LossVector& b) {
  double d = linf_distance(a.losses(), b.losses());
  return d * d;
}

}  // namespace trackex
