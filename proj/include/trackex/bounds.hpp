#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trackex {

/// log(KT/S).
inline double log_budget(int T, int K, int S) {
  if (T < 1 || K < 2 || S < 1 || S > T) throw std::invalid_argument("bounds: need T >= 1, K >= 2, 1 <= S <= T");
  return std::log(static_cast<double>(K) * static_cast<double>(T) / static_cast<double>(S));
}

namespace detail {

inline void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("bounds: eta must be positive");
}

inline void check_prod_eta(double eta) {
  if (!(eta > 0.0 && eta <= 0.5)) throw std::invalid_argument("bounds: eta must lie in (0, 1/2] for Prod-family bounds");
}

}  // namespace detail

/// Clipped OMD: eta T + S log(KT/S) / eta + S.
inline double bound_theorem1(double eta, int T, int K, int S) {
  detail::check_eta(eta);
  const double s = static_cast<double>(S);
  return eta * static_cast<double>(T) + s * log_budget(T, K, S) / eta + s;
}

/// PCS: eta L2 + S log(KT/S) / eta + 3S/2.
inline double bound_theorem2(double eta, double L2, int T, int K, int S) {
  detail::check_prod_eta(eta);
  const double s = static_cast<double>(S);
  return eta * L2 + s * log_budget(T, K, S) / eta + 1.5 * s;
}

/// OCS: eta P_inf + S log(KT/S) / eta + S.
inline double bound_theorem3(double eta, double P_inf, int T, int K, int S) {
  detail::check_eta(eta);
  const double s = static_cast<double>(S);
  return eta * P_inf + s * log_budget(T, K, S) / eta + s;
}

/// OCS+ with the doubling trick: the larger of the two epoch-count cases,
/// 8 sqrt(P_inf S log(KT/S)) + S and 4 sqrt(S log(KT/S)) + S.
inline double bound_theorem4(double P_inf, int T, int K, int S) {
  if (!(P_inf >= 0.0)) throw std::invalid_argument("bounds: P_inf must be non-negative");
  const double sl = static_cast<double>(S) * log_budget(T, K, S);
  const double s = static_cast<double>(S);
  return std::max(8.0 * std::sqrt(P_inf * sl) + s, 4.0 * std::sqrt(sl) + s);
}

/// Looser additive form 8 sqrt(S (P_inf + 1) log(KT/S)) + 4 sqrt(S log(KT/S)) + S;
/// dominates bound_theorem4.
inline double bound_theorem4_additive(double P_inf, int T, int K, int S) {
  if (!(P_inf >= 0.0)) throw std::invalid_argument("bounds: P_inf must be non-negative");
  const double sl = static_cast<double>(S) * log_budget(T, K, S);
  return 8.0 * std::sqrt((P_inf + 1.0) * sl) + 4.0 * std::sqrt(sl) + static_cast<double>(S);
}

/// PCSP: eta M2 + S log(KT/S) / eta + 5S/2.
inline double bound_theorem5(double eta, double M2, int T, int K, int S) {
  detail::check_prod_eta(eta);
  const double s = static_cast<double>(S);
  return eta * M2 + s * log_budget(T, K, S) / eta + 2.5 * s;
}

// ── Learning rates ──────────────────────────────────────────────────

/// sqrt(S log(KT/S) / T); minimizes bound_theorem1.
inline double theorem_eta_omd(int T, int K, int S) {
  return std::sqrt(static_cast<double>(S) * log_budget(T, K, S) / static_cast<double>(T));
}

/// min(sqrt(S log(KT/S) / q), 1/2) for q = L2 or M2; q = 0 gives 1/2.
inline double hindsight_eta_prod(double q, int T, int K, int S) {
  if (!(q > 0.0)) return 0.5;
  return std::min(std::sqrt(static_cast<double>(S) * log_budget(T, K, S) / q), 0.5);
}

/// sqrt(S log(KT/S) / P_inf); P_inf = 0 falls back to the Theorem 1 rate.
inline double hindsight_eta_ocs(double P_inf, int T, int K, int S) {
  if (!(P_inf > 0.0)) return theorem_eta_omd(T, K, S);
  return std::sqrt(static_cast<double>(S) * log_budget(T, K, S) / P_inf);
}

/// Upper bound on the number of OCS+ epochs, ceil(log2(sqrt(P_inf T)) + 2).
/// P_inf T < 1 (including 0) is counted as one epoch plus the slack of 2.
inline int max_epochs_theorem4(double P_inf, int T) {
  const double pt = std::max(P_inf * static_cast<double>(T), 1.0);
  return static_cast<int>(std::ceil(std::log2(std::sqrt(pt)) + 2.0));
}

}  // namespace trackex
