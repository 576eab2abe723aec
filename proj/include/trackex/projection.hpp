#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "trackex/simplex.hpp"

namespace trackex {

/// Result of the entropic projection onto {w : w_i >= floor, sum w = 1}.
struct ClippedProjectionResult {
  Distribution point;
  std::vector<bool> clipped_mask;  // true where the floor is active
  double scale = 1.0;              // point[i] = scale * input[i] on unclipped coordinates
};

namespace detail {

inline void check_floor(double clip_floor, std::size_t k) {
  if (!(clip_floor >= 0.0) || !std::isfinite(clip_floor))
    throw infeasible_error("clip floor must be a finite non-negative number");
  if (clip_floor * static_cast<double>(k) > 1.0 + 1e-12)
    throw infeasible_error("clip floor * K exceeds 1: clipped simplex is empty");
}

// Water-filling on a non-negative input with positive sum. The optimum is
// w_i = max(floor, c * p_i); the clipped set is a prefix of p sorted
// ascending, so scanning candidate prefixes finds the unique scale c.
inline ClippedProjectionResult water_fill(std::span<const double> p, double clip_floor) {
  const std::size_t k = p.size();
  if (k == 0) throw dimension_error("kl_project_clipped: empty input");
  check_floor(clip_floor, k);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  std::vector<double> suffix(k + 1, 0.0);
  for (std::size_t j = k; j-- > 0;) suffix[j] = suffix[j + 1] + p[order[j]];
  if (!(suffix[0] > 0.0) || !std::isfinite(suffix[0]))
    throw std::domain_error("kl_project_clipped: input must have positive finite mass");

  // Kf >= 1 (up to rounding) leaves the uniform point as the only feasible one.
  const bool singleton = clip_floor * static_cast<double>(k) >= 1.0;

  std::size_t n_clipped = singleton ? k : k - 1;
  double scale = 0.0;
  if (!singleton) {
    for (std::size_t j = 0; j < k; ++j) {
      scale = (1.0 - static_cast<double>(j) * clip_floor) / suffix[j];
      if (j == k - 1 || scale * p[order[j]] >= clip_floor) {
        n_clipped = j;
        break;
      }
    }
  }

  std::vector<bool> mask(k, false);
  for (std::size_t j = 0; j < n_clipped; ++j) mask[order[j]] = true;

  std::vector<double> w(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = mask[i] ? (singleton ? 1.0 / static_cast<double>(k) : clip_floor) : scale * p[i];
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return {Distribution(std::move(w)), std::move(mask), singleton ? 0.0 : scale / sum};
}

}  // namespace detail

/// Exact KL projection of a strictly positive (possibly unnormalized)
/// vector onto the clipped simplex. O(K log K).
inline ClippedProjectionResult kl_project_clipped(std::span<const double> p, double clip_floor) {
  for (double x : p)
    if (!(x > 0.0)) throw std::domain_error("kl_project_clipped: entries must be strictly positive");
  return detail::water_fill(p, clip_floor);
}

inline ClippedProjectionResult kl_project_clipped(const Distribution& p, double clip_floor) {
  return kl_project_clipped(p.weights(), clip_floor);
}

/// One mirror-descent step on the clipped simplex:
///   argmin_{w' in clipped simplex} <w', eta g> + KL(w' || w).
/// Exponents are shifted by their maximum before exp().
inline Distribution clipped_omd_step(const Distribution& w, std::span<const double> g, double eta,
                                     double clip_floor) {
  if (w.size() != g.size()) throw dimension_error("clipped_omd_step: dimension mismatch");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("clipped_omd_step: bad eta");
  const std::size_t k = w.size();
  std::vector<double> expo(k);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    expo[i] = -eta * g[i];
    shift = std::max(shift, expo[i]);
  }
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = w[i] * std::exp(expo[i] - shift);
  return detail::water_fill(p, clip_floor).point;
}

inline Distribution clipped_omd_step(const Distribution& w, const LossVector& g, double eta,
                                     double clip_floor) {
  return clipped_omd_step(w, g.losses(), eta, clip_floor);
}

/// Prod (multilinear) step on the clipped simplex:
///   argmin <w', -log(1 - eta l)> + KL(w' || w), i.e. the projection of w * (1 - eta l).
inline Distribution clipped_prod_step(const Distribution& w, const LossVector& l, double eta,
                                      double clip_floor) {
  if (w.size() != l.size()) throw dimension_error("clipped_prod_step: dimension mismatch");
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] * (1.0 - eta * l[i]);
  return detail::water_fill(p, clip_floor).point;
}

}  // namespace trackex
