#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "trackex/matrix.hpp"

namespace trackex {

/// Prod on the clipped spectraplex. Each update forms
///   M = log W_t + log(I - eta Z_t)
/// and projects exp(M) onto the clipped spectraplex (floor S/(TK)).
class PcspLearner {
 public:
  explicit PcspLearner(const HorizonConfig& config)
      : cfg_(config), w_(SpectraplexPoint::uniform(static_cast<std::size_t>(config.K))) {
    cfg_.validate();
    if (!(cfg_.eta > 0.0 && cfg_.eta <= 0.5)) throw infeasible_error("pcsp: eta must lie in (0, 1/2]");
  }

  std::string_view name() const { return "pcsp"; }
  double eta() const noexcept { return cfg_.eta; }
  double clip_floor() const noexcept { return cfg_.clip_floor(); }
  int rounds_seen() const noexcept { return round_; }

  const SpectraplexPoint& predict() {
    predicted_ = true;
    return w_;
  }

  void update(const LossMatrix& z) {
    if (!predicted_) throw std::logic_error("PcspLearner::update called without a preceding predict()");
    if (z.size() != w_.size()) throw dimension_error("PcspLearner::update: dimension mismatch");
    const double eta = cfg_.eta;
    // 1 - eta*lambda >= 1/2 for |lambda| <= 1 and eta <= 1/2.
    const SymmetricMatrix log_prod = spectral_apply(z.eig(), [eta](double x) { return std::log1p(-eta * x); });
    const SymmetricMatrix m = matrix_log(w_) + log_prod;
    w_ = detail::project_log_spectrum(sym_eig(m), cfg_.clip_floor());
    predicted_ = false;
    ++round_;
  }

 private:
  HorizonConfig cfg_;
  SpectraplexPoint w_;
  bool predicted_ = false;
  int round_ = 0;
};

}  // namespace trackex
