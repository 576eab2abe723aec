#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"
#include "trackex/learners.hpp"
#include "trackex/matrix.hpp"
#include "trackex/oracles.hpp"
#include "trackex/projection.hpp"
#include "trackex/verification.hpp"

namespace trackex::properties {

struct CheckResult {
  std::string name;
  bool pass = true;
  long long cases = 0;
  double worst = 0.0;  // largest deviation or gap observed
  std::string detail;
};

// ── Random instances ────────────────────────────────────────────────

inline double uniform_in(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline int int_in(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
}

inline LossVector random_loss(CounterRng& rng, std::size_t k) {
  std::vector<double> l(k);
  for (double& x : l) {
    const double u = rng.uniform();
    x = u < 0.1 ? 0.0 : (u < 0.2 ? 1.0 : rng.uniform());
  }
  return LossVector(std::move(l));
}

/// Point of the simplex floored at f: f + (1 - kf) * (normalized uniforms).
inline Distribution random_clipped_point(CounterRng& rng, std::size_t k, double f) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& x : p) {
    x = rng.uniform() + 1e-3;
    s += x;
  }
  for (double& x : p) x = f + (1.0 - static_cast<double>(k) * f) * x / s;
  return Distribution::normalized(std::move(p));
}

inline Matrix random_orthogonal(CounterRng& rng, std::size_t k) { return sym_eig(random_symmetric(rng, k)).vectors; }

inline SpectraplexPoint random_spectraplex(CounterRng& rng, std::size_t k, double f) {
  auto values = random_clipped_point(rng, k, f).vec();
  std::sort(values.begin(), values.end(), std::greater<>());
  return SpectraplexPoint(random_orthogonal(rng, k), std::move(values));
}

// Segment budget, horizon and expert count with floor S/(TK).
struct Horizon {
  int T, K, S;
  double floor() const { return static_cast<double>(S) / (static_cast<double>(T) * static_cast<double>(K)); }
};

inline Horizon random_horizon(CounterRng& rng, int max_k) {
  const int T = int_in(rng, 1, 1000);
  return {T, int_in(rng, 2, max_k), int_in(rng, 1, T)};
}

inline std::string worst_detail(const char* what, double worst) {
  std::ostringstream os;
  os << what << " " << worst;
  return os.str();
}

// ── Projections vs oracles ──────────────────────────────────────────

inline CheckResult check_vector_projection(int instances, std::uint64_t seed, double tol = 1e-6) {
  CounterRng rng(seed);
  CheckResult r{"vector projection vs numeric oracle", true, 0, 0.0, {}};
  for (int n = 0; n < instances; ++n) {
    const std::size_t k = static_cast<std::size_t>(int_in(rng, 2, 20));
    std::vector<double> p(k);
    for (double& x : p) x = std::exp(uniform_in(rng, -4.0, 4.0));
    const double f = rng.uniform() < 0.05 ? 0.0 : uniform_in(rng, 0.0, 0.95) / static_cast<double>(k);
    const auto fast = kl_project_clipped(p, f).point;
    const auto slow = oracle::kl_project(p, f);
    r.worst = std::max(r.worst, linf_distance(fast.weights(), slow));
    ++r.cases;
  }
  r.pass = r.worst < tol;
  r.detail = worst_detail("max L-inf deviation", r.worst);
  return r;
}

inline CheckResult check_matrix_projection(int instances, std::uint64_t seed, double tol = 1e-5) {
  CounterRng rng(seed);
  CheckResult r{"spectral projection vs PSD-cone oracle", true, 0, 0.0, {}};
  for (int n = 0; n < instances; ++n) {
    const std::size_t k = static_cast<std::size_t>(int_in(rng, 2, 6));
    std::vector<double> d(k);
    for (double& x : d) x = std::exp(uniform_in(rng, -3.0, 3.0));
    const SymmetricMatrix p = compose_spectral(random_orthogonal(rng, k), d);
    const double f = uniform_in(rng, 0.05, 0.9) / static_cast<double>(k);
    const auto fast = vn_project_clipped(p, f).eig().values;
    const auto slow = oracle::vn_project_eigenvalues(p.matrix(), f);
    r.worst = std::max(r.worst, linf_distance(fast, slow));
    ++r.cases;
  }
  r.pass = r.worst < tol;
  r.detail = worst_detail("max eigenvalue deviation", r.worst);
  return r;
}

// ── Projection-update equivalence ───────────────────────────────────

/// Clipped OMD against MWU followed by projection with alpha = S/(TK).
inline CheckResult check_projection_equivalence(int seeds, int T, int K, int S, double eta, std::uint64_t seed0,
                                                double tol = 1e-9) {
  CheckResult r{"clipped OMD equals projection update", true, 0, 0.0, {}};
  const HorizonConfig cfg(T, K, S, eta);
  const EnvironmentKind kinds[] = {EnvironmentKind::piecewise_stationary, EnvironmentKind::drifting,
                                   EnvironmentKind::small_loss, EnvironmentKind::worst_case_switching};
  for (int s = 0; s < seeds; ++s) {
    EnvironmentSpec spec;
    spec.kind = kinds[s % 4];
    spec.T = T;
    spec.K = K;
    spec.S_true = S;
    spec.seed = seed0 + static_cast<std::uint64_t>(s);
    spec.noise = 0.3;
    spec.leader_loss_mean = 0.1;
    const auto losses = generate(spec);
    ClippedOmdLearner omd(cfg);
    ProjectionUpdateLearner pu(K, eta, cfg.clip_floor());
    const auto a = record_run(omd, losses, S);
    const auto b = record_run(pu, losses, S);
    r.worst = std::max(r.worst, max_trajectory_deviation(a, b));
    ++r.cases;
  }
  r.pass = r.worst < tol;
  r.detail = worst_detail("max per-round L-inf deviation", r.worst);
  return r;
}

// ── Comparator DP vs enumeration ────────────────────────────────────

struct BruteSequence {
  double cost = 0.0;
  int switches = 0;
  std::vector<int> sequence;
};

// Lexicographic minimum of (cost, switches, sequence) over budgeted sequences.
inline BruteSequence brute_force_best_sequence(std::span<const LossVector> losses, int S) {
  const std::size_t T = losses.size();
  const std::size_t K = losses.front().size();
  std::vector<int> seq(T, 0);
  BruteSequence best{std::numeric_limits<double>::infinity(), 0, {}};
  while (true) {
    int switches = 0;
    double cost = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (t > 0 && seq[t] != seq[t - 1]) ++switches;
      cost += losses[t][static_cast<std::size_t>(seq[t])];
    }
    if (switches <= S - 1) {
      const bool better = cost < best.cost || (cost == best.cost && switches < best.switches) ||
                          (cost == best.cost && switches == best.switches && seq < best.sequence);
      if (better) best = {cost, switches, seq};
    }
    std::size_t pos = 0;
    while (pos < T && ++seq[pos] == static_cast<int>(K)) seq[pos++] = 0;
    if (pos == T) break;
  }
  return best;
}

/// All T <= 8, K <= 3, S <= 3: quantized losses (exact sums, many ties)
/// must reproduce the enumerated optimum and its tie-break exactly;
/// real-valued losses must match the enumerated cost to 1e-12.
inline CheckResult check_vector_dp(std::uint64_t seed, int instances_per_cell = 2) {
  CounterRng rng(seed);
  CheckResult r{"vector comparator DP vs enumeration", true, 0, 0.0, {}};
  for (int T = 1; T <= 8; ++T)
    for (std::size_t K = 1; K <= 3; ++K)
      for (int S = 1; S <= std::min(3, T); ++S)
        for (int n = 0; n < instances_per_cell; ++n) {
          std::vector<LossVector> quantized, real;
          for (int t = 0; t < T; ++t) {
            std::vector<double> q(K), x(K);
            for (std::size_t i = 0; i < K; ++i) {
              q[i] = static_cast<double>(rng.below(5)) / 4.0;
              x[i] = rng.uniform();
            }
            quantized.emplace_back(std::move(q));
            real.emplace_back(std::move(x));
          }
          const auto dp = best_switching_sequence(quantized, S);
          const auto bf = brute_force_best_sequence(quantized, S);
          if (dp.total_loss != bf.cost || dp.switches_used != bf.switches || dp.best_sequence != bf.sequence) {
            r.pass = false;
            r.worst = std::max(r.worst, std::abs(dp.total_loss - bf.cost));
          }
          const double gap = std::abs(best_switching_sequence(real, S).total_loss - oracle::brute_force_switching(real, S));
          r.worst = std::max(r.worst, gap);
          if (gap > 1e-12) r.pass = false;
          r.cases += 2;
        }
  r.detail = worst_detail("max cost deviation", r.worst);
  return r;
}

inline CheckResult check_matrix_dp(std::uint64_t seed, int instances_per_cell = 2, double tol = 1e-9) {
  CounterRng rng(seed);
  CheckResult r{"matrix comparator DP vs enumeration", true, 0, 0.0, {}};
  for (int T = 1; T <= 8; ++T)
    for (std::size_t K = 2; K <= 3; ++K)
      for (int S = 1; S <= std::min(3, T); ++S)
        for (int n = 0; n < instances_per_cell; ++n) {
          std::vector<LossMatrix> losses;
          for (int t = 0; t < T; ++t) losses.emplace_back(random_symmetric(rng, K));
          const double gap =
              std::abs(best_switching_matrix(losses, S).total_loss - oracle::brute_force_matrix(losses, S));
          r.worst = std::max(r.worst, gap);
          ++r.cases;
        }
  r.pass = r.worst <= tol;
  r.detail = worst_detail("max cost deviation", r.worst);
  return r;
}

// ── Lemma fuzzing (largest gap must stay at or below the tolerance) ─

inline CheckResult finish_fuzz(CheckResult r, double tol) {
  r.pass = r.worst <= tol;
  r.detail = worst_detail("max gap", r.worst);
  return r;
}

inline CheckResult fuzz_lemma2(int draws, std::uint64_t seed) {
  CounterRng rng(seed);
  CheckResult r{"lemma: smoothed comparator costs at most S/T", true, 0, -1e300, {}};
  for (int n = 0; n < draws; ++n, ++r.cases) {
    const Horizon h = random_horizon(rng, 16);
    const auto l = random_loss(rng, static_cast<std::size_t>(h.K));
    r.worst = std::max(r.worst, lemma2_gap(rng.below(static_cast<std::size_t>(h.K)), l, h.T, h.K, h.S));
  }
  return finish_fuzz(r, kLemma2Tolerance);
}

inline CheckResult fuzz_lemma3(int draws, std::uint64_t seed) {
  CounterRng rng(seed);
  CheckResult r{"lemma: clipped OMD one-step loss change at most eta", true, 0, -1e300, {}};
  for (int n = 0; n < draws; ++n, ++r.cases) {
    const Horizon h = random_horizon(rng, 16);
    const double eta = uniform_in(rng, 1e-3, 1.0);
    const auto w = random_clipped_point(rng, static_cast<std::size_t>(h.K), h.floor());
    const auto l = random_loss(rng, static_cast<std::size_t>(h.K));
    const auto next = clipped_omd_step(w, l, eta, h.floor());
    r.worst = std::max(r.worst, lemma3_gap(w, next, l, eta));
  }
  return finish_fuzz(r, kStepLemmaTolerance);
}

inline CheckResult fuzz_lemma4(int draws, std::uint64_t seed) {
  CounterRng rng(seed);
  CheckResult r{"lemma: optimistic step bounded by eta times squared variation", true, 0, -1e300, {}};
  for (int n = 0; n < draws; ++n, ++r.cases) {
    const Horizon h = random_horizon(rng, 16);
    const double eta = uniform_in(rng, 1e-3, 1.0);
    const auto aux = random_clipped_point(rng, static_cast<std::size_t>(h.K), h.floor());
    const auto prev = random_loss(rng, static_cast<std::size_t>(h.K));
    const auto l = random_loss(rng, static_cast<std::size_t>(h.K));
    const auto w = clipped_omd_step(aux, prev, eta, h.floor());
    const auto aux_next = clipped_omd_step(aux, l, eta, h.floor());
    r.worst = std::max(r.worst, lemma4_gap(w, aux_next, l, prev, eta));
  }
  return finish_fuzz(r, kStepLemmaTolerance);
}

inline CheckResult fuzz_lemma5(int draws, std::uint64_t seed) {
  CounterRng rng(seed);
  CheckResult r{"lemma: smoothed matrix comparator costs at most 2S/T", true, 0, -1e300, {}};
  for (int n = 0; n < draws; ++n, ++r.cases) {
    const Horizon h = random_horizon(rng, 6);
    const std::size_t k = static_cast<std::size_t>(h.K);
    const auto u = random_spectraplex(rng, k, 0.0);
    const LossMatrix z(random_symmetric(rng, k));
    r.worst = std::max(r.worst, lemma5_gap(u.matrix(), z, h.T, h.K, h.S));
  }
  return finish_fuzz(r, kLemma5Tolerance);
}

inline CheckResult fuzz_lemma9(int draws, std::uint64_t seed) {
  CounterRng rng(seed);
  CheckResult r{"lemma: log-ratio trace bounded by log(KT/S)", true, 0, -1e300, {}};
  for (int n = 0; n < draws; ++n, ++r.cases) {
    const Horizon h = random_horizon(rng, 6);
    const std::size_t k = static_cast<std::size_t>(h.K);
    const auto x = random_spectraplex(rng, k, h.floor());
    const auto y = random_spectraplex(rng, k, h.floor());
    const auto z = random_spectraplex(rng, k, h.floor());
    r.worst = std::max(r.worst, lemma9_gap(x.matrix(), y, z, h.T, h.K, h.S));
  }
  return finish_fuzz(r, kLemma9Tolerance);
}

// ── Whole suite ─────────────────────────────────────────────────────

inline std::vector<CheckResult> run_all(std::uint64_t seed) {
  return {
      check_vector_projection(1000, seed + 1),
      check_matrix_projection(200, seed + 2),
      check_projection_equivalence(50, 500, 8, 5, 0.1, seed + 3),
      check_vector_dp(seed + 4),
      check_matrix_dp(seed + 5),
      fuzz_lemma2(10000, seed + 6),
      fuzz_lemma3(10000, seed + 7),
      fuzz_lemma4(10000, seed + 8),
      fuzz_lemma5(10000, seed + 9),
      fuzz_lemma9(10000, seed + 10),
  };
}

}  // namespace trackex::properties
