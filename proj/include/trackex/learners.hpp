#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "trackex/projection.hpp"
#include "trackex/simplex.hpp"

namespace trackex {

// ── Single-step updates ─────────────────────────────────────────────

/// Multiplicative weights: w'_i proportional to w_i exp(-eta l_i).
inline Distribution mwu_step(const Distribution& w, const LossVector& l, double eta) {
  if (w.size() != l.size()) throw dimension_error("mwu_step: dimension mismatch");
  double shift = -std::numeric_limits<double>::infinity();
  for (double x : l.losses()) shift = std::max(shift, -eta * x);
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] * std::exp(-eta * l[i] - shift);
  return Distribution::normalized(std::move(p));
}

/// MWU followed by sharing a fraction alpha of each expert's mass
/// equally among the other K-1 experts.
inline Distribution fixed_share_step(const Distribution& w, const LossVector& l, double eta,
                                     double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw infeasible_error("fixed_share_step: alpha must lie in [0,1]");
  if (w.size() < 2) throw dimension_error("fixed_share_step: needs K >= 2");
  const Distribution wm = mwu_step(w, l, eta);
  const double share = alpha / static_cast<double>(w.size() - 1);
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = (1.0 - alpha) * wm[i] + share * (1.0 - wm[i]);
  return Distribution::normalized(std::move(out));
}

/// MWU followed by the KL projection onto the simplex floored at alpha.
inline Distribution projection_update_step(const Distribution& w, const LossVector& l, double eta,
                                           double alpha) {
  const Distribution wm = mwu_step(w, l, eta);
  return detail::water_fill(wm.weights(), alpha).point;
}

// ── Learner interface ───────────────────────────────────────────────

/// Protocol: predict() then update(loss), once per round. predict() is
/// idempotent between updates; update() without a preceding predict()
/// throws std::logic_error.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string_view name() const = 0;

  const Distribution& predict() {
    if (!prediction_) prediction_ = compute_prediction();
    return *prediction_;
  }

  void update(const LossVector& loss) {
    if (!prediction_) throw std::logic_error("Learner::update called without a preceding predict()");
    if (loss.size() != prediction_->size()) throw dimension_error("Learner::update: dimension mismatch");
    apply_update(loss);
    prediction_.reset();
    ++round_;
  }

  /// Learning rate behind the current prediction and the next update.
  virtual double eta() const = 0;
  /// Doubling-trick epoch, 0 for learners without epochs.
  virtual int epoch() const { return 0; }
  /// Auxiliary (optimistic) iterate, when the learner keeps one.
  virtual const Distribution* aux_weights() const { return nullptr; }
  /// Clip floor of the feasible set; 0 for unclipped learners.
  virtual double clip_floor() const { return 0.0; }

  int rounds_seen() const noexcept { return round_; }

 protected:
  virtual Distribution compute_prediction() const = 0;
  virtual void apply_update(const LossVector& loss) = 0;

 private:
  std::optional<Distribution> prediction_;
  int round_ = 0;
};

// ── Baselines ───────────────────────────────────────────────────────

class MwuLearner final : public Learner {
 public:
  MwuLearner(int k, double eta) : w_(Distribution::uniform(static_cast<std::size_t>(k))), eta_(eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("mwu: eta must be positive");
  }
  std::string_view name() const override { return "mwu"; }
  double eta() const override { return eta_; }

 protected:
  Distribution compute_prediction() const override { return w_; }
  void apply_update(const LossVector& l) override { w_ = mwu_step(w_, l, eta_); }

 private:
  Distribution w_;
  double eta_;
};

class FixedShareLearner final : public Learner {
 public:
  FixedShareLearner(int k, double eta, double alpha)
      : w_(Distribution::uniform(static_cast<std::size_t>(k))), eta_(eta), alpha_(alpha) {
    if (!(eta > 0.0)) throw std::invalid_argument("fixed_share: eta must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw infeasible_error("fixed_share: alpha must lie in [0,1]");
  }
  std::string_view name() const override { return "fixed_share"; }
  double eta() const override { return eta_; }

 protected:
  Distribution compute_prediction() const override { return w_; }
  void apply_update(const LossVector& l) override { w_ = fixed_share_step(w_, l, eta_, alpha_); }

 private:
  Distribution w_;
  double eta_;
  double alpha_;
};

class ProjectionUpdateLearner final : public Learner {
 public:
  ProjectionUpdateLearner(int k, double eta, double alpha)
      : w_(Distribution::uniform(static_cast<std::size_t>(k))), eta_(eta), alpha_(alpha) {
    if (!(eta > 0.0)) throw std::invalid_argument("projection_update: eta must be positive");
    detail::check_floor(alpha, static_cast<std::size_t>(k));
  }
  std::string_view name() const override { return "projection_update"; }
  double eta() const override { return eta_; }
  double clip_floor() const override { return alpha_; }

 protected:
  Distribution compute_prediction() const override { return w_; }
  void apply_update(const LossVector& l) override { w_ = projection_update_step(w_, l, eta_, alpha_); }

 private:
  Distribution w_;
  double eta_;
  double alpha_;
};

// ── Clipped-simplex learners ────────────────────────────────────────

/// Mirror descent restricted to the clipped simplex, floor S/(TK).
class ClippedOmdLearner final : public Learner {
 public:
  explicit ClippedOmdLearner(const HorizonConfig& config)
      : cfg_(config), w_(Distribution::uniform(static_cast<std::size_t>(config.K))) {
    cfg_.validate();
  }
  std::string_view name() const override { return "clipped_omd"; }
  double eta() const override { return cfg_.eta; }
  double clip_floor() const override { return cfg_.clip_floor(); }

 protected:
  Distribution compute_prediction() const override { return w_; }
  void apply_update(const LossVector& l) override {
    w_ = clipped_omd_step(w_, l, cfg_.eta, cfg_.clip_floor());
  }

 private:
  HorizonConfig cfg_;
  Distribution w_;
};

/// Prod on the clipped simplex: multilinear update, then projection.
class PcsLearner final : public Learner {
 public:
  explicit PcsLearner(const HorizonConfig& config)
      : cfg_(config), w_(Distribution::uniform(static_cast<std::size_t>(config.K))) {
    cfg_.validate();
    if (!(cfg_.eta > 0.0 && cfg_.eta <= 0.5)) throw infeasible_error("pcs: eta must lie in (0, 1/2]");
  }
  std::string_view name() const override { return "pcs"; }
  double eta() const override { return cfg_.eta; }
  double clip_floor() const override { return cfg_.clip_floor(); }

 protected:
  Distribution compute_prediction() const override { return w_; }
  void apply_update(const LossVector& l) override {
    w_ = clipped_prod_step(w_, l, cfg_.eta, cfg_.clip_floor());
  }

 private:
  HorizonConfig cfg_;
  Distribution w_;
};

/// Optimistic mirror descent on the clipped simplex. The prediction uses
/// the previous loss as a hint on top of the auxiliary iterate.
class OcsLearner final : public Learner {
 public:
  explicit OcsLearner(const HorizonConfig& config)
      : cfg_(config),
        aux_(Distribution::uniform(static_cast<std::size_t>(config.K))),
        last_loss_(LossVector::zeros(static_cast<std::size_t>(config.K))) {
    cfg_.validate();
  }
  std::string_view name() const override { return "ocs"; }
  double eta() const override { return cfg_.eta; }
  double clip_floor() const override { return cfg_.clip_floor(); }
  const Distribution* aux_weights() const override { return &aux_; }
  const LossVector& last_loss() const noexcept { return last_loss_; }

 protected:
  Distribution compute_prediction() const override {
    return clipped_omd_step(aux_, last_loss_, cfg_.eta, cfg_.clip_floor());
  }
  void apply_update(const LossVector& l) override {
    aux_ = clipped_omd_step(aux_, l, cfg_.eta, cfg_.clip_floor());
    last_loss_ = l;
  }

 private:
  HorizonConfig cfg_;
  Distribution aux_;
  LossVector last_loss_;
};

/// OCS with a doubling trick on the learning rate: starts at
/// eta_1 = sqrt(S log(KT/S)) and halves whenever the path length seen in
/// the current epoch makes eta_m > sqrt(S log(KT/S) / P_m). The auxiliary
/// iterate and the loss hint carry over across epochs.
class OcsPlusLearner final : public Learner {
 public:
  OcsPlusLearner(int T, int K, int S)
      : cfg_(T, K, S, 1.0),
        aux_(Distribution::uniform(static_cast<std::size_t>(K))),
        last_loss_(LossVector::zeros(static_cast<std::size_t>(K))) {
    budget_ = static_cast<double>(S) * cfg_.log_term();
    eta_ = std::sqrt(budget_);
  }

  std::string_view name() const override { return "ocs_plus"; }
  double eta() const override { return eta_; }
  int epoch() const override { return epoch_; }
  double clip_floor() const override { return cfg_.clip_floor(); }
  const Distribution* aux_weights() const override { return &aux_; }

  double initial_eta() const noexcept { return std::sqrt(budget_); }
  /// Round index after which the current epoch started (tau_m).
  int epoch_start() const noexcept { return tau_; }
  double epoch_path_length() const noexcept { return path_; }

 protected:
  Distribution compute_prediction() const override {
    return clipped_omd_step(aux_, last_loss_, eta_, cfg_.clip_floor());
  }

  void apply_update(const LossVector& l) override {
    aux_ = clipped_omd_step(aux_, l, eta_, cfg_.clip_floor());
    path_ += linf_norm_diff_sq(l, last_loss_);
    last_loss_ = l;
    // The round that trips the test is charged to the epoch it ends.
    if (path_ > 0.0 && eta_ > std::sqrt(budget_ / path_)) {
      eta_ /= 2.0;
      tau_ = rounds_seen() + 1;
      ++epoch_;
      path_ = 0.0;
    }
  }

 private:
  HorizonConfig cfg_;
  Distribution aux_;
  LossVector last_loss_;
  double budget_ = 0.0;
  double eta_ = 0.0;
  double path_ = 0.0;
  int epoch_ = 1;
  int tau_ = 0;
};

}  // namespace trackex
