#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trackex/bounds.hpp"
#include "trackex/comparator.hpp"
#include "trackex/learners.hpp"
#include "trackex/matrix.hpp"
#include "trackex/pcsp.hpp"
#include "trackex/projection.hpp"
#include "trackex/simplex.hpp"

namespace trackex {

// ── Recorded runs ───────────────────────────────────────────────────

/// Everything a learner did on one loss sequence. aux_after[t] is the
/// auxiliary iterate after the update of round t (optimistic learners only).
struct RunRecord {
  std::string learner;
  int S = 1;  // segment budget the learner was built for
  double clip_floor = 0.0;
  std::vector<Distribution> predictions;
  std::vector<Distribution> aux_after;
  std::vector<double> etas;
  std::vector<int> epochs;
  std::vector<double> round_losses;

  std::size_t rounds() const noexcept { return predictions.size(); }
  double cumulative_loss() const {
    double s = 0.0;
    for (double x : round_losses) s += x;
    return s;
  }
  int final_epoch() const { return epochs.empty() ? 0 : epochs.back(); }
};

inline RunRecord record_run(Learner& learner, std::span<const LossVector> losses, int S) {
  RunRecord rec;
  rec.learner = std::string(learner.name());
  rec.S = S;
  rec.clip_floor = learner.clip_floor();
  rec.predictions.reserve(losses.size());
  for (const auto& l : losses) {
    const Distribution& w = learner.predict();
    rec.predictions.push_back(w);
    rec.etas.push_back(learner.eta());
    rec.epochs.push_back(learner.epoch());
    rec.round_losses.push_back(weighted_loss(w, l));
    learner.update(l);
    if (const Distribution* aux = learner.aux_weights()) rec.aux_after.push_back(*aux);
  }
  return rec;
}

struct MatrixRunRecord {
  std::string learner = "pcsp";
  int S = 1;
  double eta = 0.0;
  double clip_floor = 0.0;
  std::vector<SpectraplexPoint> predictions;
  std::vector<double> round_losses;

  std::size_t rounds() const noexcept { return predictions.size(); }
  double cumulative_loss() const {
    double s = 0.0;
    for (double x : round_losses) s += x;
    return s;
  }
};

inline MatrixRunRecord record_matrix_run(PcspLearner& learner, std::span<const LossMatrix> losses, int S) {
  MatrixRunRecord rec;
  rec.S = S;
  rec.eta = learner.eta();
  rec.clip_floor = learner.clip_floor();
  rec.predictions.reserve(losses.size());
  for (const auto& z : losses) {
    const SpectraplexPoint& w = learner.predict();
    rec.predictions.push_back(w);
    rec.round_losses.push_back(trace_product(w.matrix().matrix(), z.matrix().matrix()));
    learner.update(z);
  }
  return rec;
}

/// max_t ||w_t - w'_t||_inf over two runs of equal length.
inline double max_trajectory_deviation(const RunRecord& a, const RunRecord& b) {
  if (a.rounds() != b.rounds()) throw dimension_error("max_trajectory_deviation: runs differ in length");
  double d = 0.0;
  for (std::size_t t = 0; t < a.rounds(); ++t)
    d = std::max(d, linf_distance(a.predictions[t].weights(), b.predictions[t].weights()));
  return d;
}

/// max_t max_ij |W_t(i,j) - diag(w_t)(i,j)| between a matrix run and a
/// vector run on the diagonal embedding of the same losses.
inline double max_diagonal_deviation(const MatrixRunRecord& m, const RunRecord& v) {
  if (m.rounds() != v.rounds()) throw dimension_error("max_diagonal_deviation: runs differ in length");
  double d = 0.0;
  for (std::size_t t = 0; t < m.rounds(); ++t) {
    const auto& w = m.predictions[t].matrix();
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double target = i == j ? v.predictions[t][i] : 0.0;
        d = std::max(d, std::abs(w(i, j) - target));
      }
  }
  return d;
}

// ── Single-step lemma gaps (left side minus right side) ─────────────

inline constexpr double kLemma2Tolerance = 1e-12;
inline constexpr double kStepLemmaTolerance = 1e-10;
inline constexpr double kLemma5Tolerance = 1e-9;
inline constexpr double kLemma9Tolerance = 1e-8;

/// (1 - S/T) e + S/(TK), the comparator pulled into the clipped simplex.
inline Distribution smoothed_comparator(std::size_t expert, int T, int K, int S) {
  const double shrink = static_cast<double>(S) / static_cast<double>(T);
  const double floor = shrink / static_cast<double>(K);
  std::vector<double> e(static_cast<std::size_t>(K), floor);
  e[expert] += 1.0 - shrink;
  return Distribution(std::move(e));
}

/// <e_bar - e, l> - S/T.
inline double lemma2_gap(std::size_t expert, const LossVector& l, int T, int K, int S) {
  if (l.size() != static_cast<std::size_t>(K) || expert >= l.size()) throw dimension_error("lemma2: bad dimensions");
  const Distribution bar = smoothed_comparator(expert, T, K, S);
  double lhs = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) lhs += (bar[i] - (i == expert ? 1.0 : 0.0)) * l[i];
  return lhs - static_cast<double>(S) / static_cast<double>(T);
}

inline bool check_lemma2(std::size_t expert, const LossVector& l, int T, int K, int S) {
  return lemma2_gap(expert, l, T, K, S) <= kLemma2Tolerance;
}

/// <w - w_next, l> - eta for one clipped mirror-descent step.
inline double lemma3_gap(const Distribution& w, const Distribution& w_next, const LossVector& l, double eta) {
  double lhs = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) lhs += (w[i] - w_next[i]) * l[i];
  return lhs - eta;
}

/// <w - aux_next, l - l_prev> - eta ||l - l_prev||_inf^2 for one optimistic step.
inline double lemma4_gap(const Distribution& w, const Distribution& aux_next, const LossVector& l,
                         const LossVector& l_prev, double eta) {
  double lhs = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) lhs += (w[i] - aux_next[i]) * (l[i] - l_prev[i]);
  return lhs - eta * linf_norm_diff_sq(l, l_prev);
}

/// (1 - S/T) U + S/(TK) I.
inline SymmetricMatrix smoothed_matrix_comparator(const SymmetricMatrix& u, int T, int K, int S) {
  const double shrink = static_cast<double>(S) / static_cast<double>(T);
  return (1.0 - shrink) * u + (shrink / static_cast<double>(K)) * SymmetricMatrix::identity(u.size());
}

/// tr((U_bar - U) Z) - 2S/T.
inline double lemma5_gap(const SymmetricMatrix& u, const LossMatrix& z, int T, int K, int S) {
  const SymmetricMatrix bar = smoothed_matrix_comparator(u, T, K, S);
  const Matrix diff = bar.matrix() - u.matrix();
  return trace_product(diff, z.matrix().matrix()) - 2.0 * static_cast<double>(S) / static_cast<double>(T);
}

/// tr(X (log Y - log Z)) - log(KT/S).
inline double lemma9_gap(const SymmetricMatrix& x, const SpectraplexPoint& y, const SpectraplexPoint& z, int T,
                         int K, int S) {
  const SymmetricMatrix diff = matrix_log(y) - matrix_log(z);
  return trace_product(x.matrix(), diff.matrix()) - log_budget(T, K, S);
}

inline SymmetricMatrix rank_one(std::span<const double> v) {
  Matrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * v[j];
  return SymmetricMatrix::symmetrize(m);
}

// ── Bound reports ───────────────────────────────────────────────────

struct BoundReport {
  std::string theorem;
  std::string learner;
  double regret = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  int violations = 0;
  bool pass = false;
};

inline constexpr double kSlackTolerance = 1e-6;

inline BoundReport make_report(std::string theorem, std::string learner, double regret, double bound, int violations) {
  BoundReport r{std::move(theorem), std::move(learner), regret, bound, bound - regret, violations, false};
  r.pass = r.slack >= -kSlackTolerance && r.violations == 0;
  return r;
}

inline nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"theorem", r.theorem}, {"learner", r.learner},       {"regret", r.regret},
                        {"bound", r.bound},     {"slack", r.slack},           {"violations", r.violations},
                        {"pass", r.pass}};
}

/// Theorem that covers a learner id, if any; throws on ids nobody registered.
inline std::optional<std::string> theorem_for(std::string_view learner) {
  if (learner == "clipped_omd" || learner == "projection_update") return "theorem1";
  if (learner == "pcs") return "theorem2";
  if (learner == "ocs") return "theorem3";
  if (learner == "ocs_plus") return "theorem4";
  if (learner == "pcsp") return "theorem5";
  if (learner == "mwu" || learner == "fixed_share") return std::nullopt;
  throw std::invalid_argument("unknown learner id: " + std::string(learner));
}

/// True when a theorem bound applies to the run: the learner has a theorem
/// and, for projection_update, its floor equals S/(TK).
inline bool has_bound(const RunRecord& run, int T, int K) {
  if (!theorem_for(run.learner)) return false;
  if (run.learner != "projection_update") return true;
  const double floor = static_cast<double>(run.S) / (static_cast<double>(T) * static_cast<double>(K));
  return std::abs(run.clip_floor - floor) <= 1e-15 * std::max(1.0, floor);
}

struct CheckOptions {
  bool lemmas = false;  // per-step lemma assertions
};

/// Per-step lemma violations along a recorded vector run.
inline int count_lemma_violations(const RunRecord& run, std::span<const LossVector> losses,
                                  const ComparatorResult& cmp) {
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  int violations = 0;
  for (std::size_t t = 0; t < losses.size(); ++t)
    if (!check_lemma2(static_cast<std::size_t>(cmp.best_sequence[t]), losses[t], T, K, run.S)) ++violations;

  if (run.learner == "clipped_omd" || run.learner == "projection_update") {
    for (std::size_t t = 0; t + 1 < run.rounds(); ++t)
      if (lemma3_gap(run.predictions[t], run.predictions[t + 1], losses[t], run.etas[t]) > kStepLemmaTolerance)
        ++violations;
  } else if (run.learner == "ocs" || run.learner == "ocs_plus") {
    const LossVector zero = LossVector::zeros(losses.front().size());
    for (std::size_t t = 0; t < run.rounds(); ++t) {
      const LossVector& prev = t == 0 ? zero : losses[t - 1];
      if (lemma4_gap(run.predictions[t], run.aux_after[t], losses[t], prev, run.etas[t]) > kStepLemmaTolerance)
        ++violations;
    }
  }
  return violations;
}

/// Tracking regret of a vector run against the comparator, checked against
/// the bound of the learner's theorem with the learning rate it used.
inline BoundReport check_trajectory(const RunRecord& run, std::span<const LossVector> losses,
                                    const ComparatorResult& cmp, const CheckOptions& opts = {}) {
  if (run.rounds() != losses.size() || cmp.best_sequence.size() != losses.size())
    throw dimension_error("check_trajectory: run, losses and comparator differ in length");
  const auto theorem = theorem_for(run.learner);
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  if (!has_bound(run, T, K)) throw std::invalid_argument("check_trajectory: no regret bound covers " + run.learner);
  const int S = run.S;
  const double regret = run.cumulative_loss() - cmp.total_loss;
  const double eta = run.etas.front();

  double bound = 0.0;
  if (*theorem == "theorem1") bound = bound_theorem1(eta, T, K, S);
  else if (*theorem == "theorem2") bound = bound_theorem2(eta, cmp.L2, T, K, S);
  else if (*theorem == "theorem3") bound = bound_theorem3(eta, path_length(losses).P_inf, T, K, S);
  else if (*theorem == "theorem4") bound = bound_theorem4(path_length(losses).P_inf, T, K, S);
  else throw std::invalid_argument("check_trajectory: " + run.learner + " is a matrix learner");

  const int violations = opts.lemmas ? count_lemma_violations(run, losses, cmp) : 0;
  return make_report(*theorem, run.learner, regret, bound, violations);
}

/// Lemma 5 and Lemma 9 along a recorded PCSP run.
inline int count_matrix_lemma_violations(const MatrixRunRecord& run, std::span<const LossMatrix> losses,
                                         const MatrixComparatorResult& cmp) {
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  int violations = 0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const SymmetricMatrix u = rank_one(cmp.vector_at(t));
    if (lemma5_gap(u, losses[t], T, K, run.S) > kLemma5Tolerance) ++violations;
    if (t + 1 < run.rounds()) {
      const SymmetricMatrix bar = smoothed_matrix_comparator(u, T, K, run.S);
      if (lemma9_gap(bar, run.predictions[t + 1], run.predictions[t], T, K, run.S) > kLemma9Tolerance) ++violations;
    }
  }
  return violations;
}

inline BoundReport check_matrix_trajectory(const MatrixRunRecord& run, std::span<const LossMatrix> losses,
                                           const MatrixComparatorResult& cmp, const CheckOptions& opts = {}) {
  if (run.rounds() != losses.size()) throw dimension_error("check_matrix_trajectory: run and losses differ in length");
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  const double regret = run.cumulative_loss() - cmp.total_loss;
  const double bound = bound_theorem5(run.eta, cmp.M2, T, K, run.S);
  const int violations = opts.lemmas ? count_matrix_lemma_violations(run, losses, cmp) : 0;
  return make_report("theorem5", run.learner, regret, bound, violations);
}

}  // namespace trackex
