#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trackex/matrix.hpp"
#include "trackex/simplex.hpp"

namespace trackex {

/// Counter-mode SplitMix64: draw n is mix(seed + n * golden), so any draw
/// can be recomputed from (seed, n) alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

enum class EnvironmentKind { piecewise_stationary, drifting, small_loss, worst_case_switching, matrix_piecewise };

inline std::string_view to_string(EnvironmentKind k) {
  switch (k) {
    case EnvironmentKind::piecewise_stationary: return "piecewise_stationary";
    case EnvironmentKind::drifting: return "drifting";
    case EnvironmentKind::small_loss: return "small_loss";
    case EnvironmentKind::worst_case_switching: return "worst_case_switching";
    case EnvironmentKind::matrix_piecewise: return "matrix_piecewise";
  }
  return "unknown";
}

inline EnvironmentKind parse_environment_kind(std::string_view s) {
  for (auto k : {EnvironmentKind::piecewise_stationary, EnvironmentKind::drifting, EnvironmentKind::small_loss,
                 EnvironmentKind::worst_case_switching, EnvironmentKind::matrix_piecewise})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown environment kind: " + std::string(s));
}

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::piecewise_stationary;
  int T = 100;
  int K = 4;
  int S_true = 1;
  std::uint64_t seed = 0;
  double noise = 0.0;             // [0,1]
  double drift_step = 0.02;       // [0,1], max L-inf move per round
  double leader_loss_mean = 0.0;  // [0,1]

  bool is_matrix() const noexcept { return kind == EnvironmentKind::matrix_piecewise; }

  void validate() const {
    if (T < 1) throw std::invalid_argument("environment: T must be positive");
    if (K < 2) throw std::invalid_argument("environment: K must be at least 2");
    if (S_true < 1 || S_true > T) throw std::invalid_argument("environment: need 1 <= S_true <= T");
    auto unit = [](double x, const char* what) {
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string("environment: ") + what + " must lie in [0,1]");
    };
    unit(noise, "noise");
    unit(drift_step, "drift_step");
    unit(leader_loss_mean, "leader_loss_mean");
  }
};

namespace detail {

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// First round of segment s when T rounds are split into n near-equal parts.
inline int segment_start(int s, int T, int n) {
  return static_cast<int>((static_cast<long long>(s) * T) / n);
}

// Leader per segment; consecutive leaders differ.
inline std::vector<std::size_t> plant_leaders(CounterRng& rng, int n, std::size_t K) {
  std::vector<std::size_t> leaders;
  for (int s = 0; s < n; ++s) {
    std::size_t e = rng.below(K);
    if (s > 0 && e == leaders.back()) e = (e + 1 + rng.below(K - 1)) % K;
    leaders.push_back(e);
  }
  return leaders;
}

inline std::vector<LossVector> piecewise_stationary(const EnvironmentSpec& spec) {
  CounterRng rng(spec.seed);
  const std::size_t K = static_cast<std::size_t>(spec.K);
  const auto leaders = plant_leaders(rng, spec.S_true, K);
  // Per-segment means of the non-leaders sit in [m + (1-m)/2, 1].
  const double m = spec.leader_loss_mean;
  std::vector<std::vector<double>> means(leaders.size(), std::vector<double>(K));
  for (auto& row : means)
    for (double& x : row) x = m + (1.0 - m) * (0.5 + 0.5 * rng.uniform());

  std::vector<LossVector> out;
  out.reserve(static_cast<std::size_t>(spec.T));
  int seg = 0;
  for (int t = 0; t < spec.T; ++t) {
    while (seg + 1 < spec.S_true && t >= segment_start(seg + 1, spec.T, spec.S_true)) ++seg;
    std::vector<double> l(K);
    for (std::size_t i = 0; i < K; ++i) {
      const double centre = i == leaders[static_cast<std::size_t>(seg)] ? m : means[static_cast<std::size_t>(seg)][i];
      l[i] = clamp01(centre + spec.noise * (rng.uniform() - 0.5));
    }
    out.emplace_back(std::move(l));
  }
  return out;
}

inline std::vector<LossVector> drifting(const EnvironmentSpec& spec) {
  CounterRng rng(spec.seed);
  const std::size_t K = static_cast<std::size_t>(spec.K);
  std::vector<double> cur(K);
  for (double& x : cur) x = rng.uniform();
  std::vector<LossVector> out;
  out.reserve(static_cast<std::size_t>(spec.T));
  out.emplace_back(cur);
  // The shrink factor keeps |step| strictly below drift_step after rounding.
  const double d = spec.drift_step * (1.0 - 0x1.0p-40);
  for (int t = 1; t < spec.T; ++t) {
    for (double& x : cur) x = clamp01(x + d * (2.0 * rng.uniform() - 1.0));
    out.emplace_back(cur);
  }
  return out;
}

// Leader losses are 2m*u (capped at 1), rescaled per segment so that the
// segment's empirical leader mean never exceeds m.
inline std::vector<LossVector> small_loss(const EnvironmentSpec& spec) {
  CounterRng rng(spec.seed);
  const std::size_t K = static_cast<std::size_t>(spec.K);
  const auto leaders = plant_leaders(rng, spec.S_true, K);
  const double m = spec.leader_loss_mean;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(spec.T), std::vector<double>(K));
  for (int seg = 0; seg < spec.S_true; ++seg) {
    const int begin = segment_start(seg, spec.T, spec.S_true);
    const int end = segment_start(seg + 1, spec.T, spec.S_true);
    const std::size_t leader = leaders[static_cast<std::size_t>(seg)];
    double total = 0.0;
    for (int t = begin; t < end; ++t) {
      auto& l = rows[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < K; ++i)
        l[i] = i == leader ? std::min(1.0, 2.0 * m * rng.uniform()) : 0.25 + 0.75 * rng.uniform();
      total += l[leader];
    }
    const double mean = total / static_cast<double>(end - begin);
    if (mean > m)
      for (int t = begin; t < end; ++t) rows[static_cast<std::size_t>(t)][leader] *= m / mean;
  }
  std::vector<LossVector> out;
  out.reserve(rows.size());
  for (auto& l : rows) out.emplace_back(std::move(l));
  return out;
}

inline std::vector<LossVector> worst_case_switching(const EnvironmentSpec& spec) {
  CounterRng rng(spec.seed);
  const std::size_t K = static_cast<std::size_t>(spec.K);
  const auto leaders = plant_leaders(rng, spec.S_true, K);
  std::vector<LossVector> out;
  out.reserve(static_cast<std::size_t>(spec.T));
  int seg = 0;
  for (int t = 0; t < spec.T; ++t) {
    while (seg + 1 < spec.S_true && t >= segment_start(seg + 1, spec.T, spec.S_true)) ++seg;
    std::vector<double> l(K);
    for (std::size_t i = 0; i < K; ++i) {
      if (i == leaders[static_cast<std::size_t>(seg)])
        l[i] = rng.uniform() < spec.noise ? 1.0 : 0.0;
      else
        l[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    out.emplace_back(std::move(l));
  }
  return out;
}

// Unit vector with independent uniform(-1,1) coordinates, normalized.
inline std::vector<double> random_unit(CounterRng& rng, std::size_t K) {
  std::vector<double> v(K);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = 2.0 * rng.uniform() - 1.0;
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double n = std::sqrt(n2);
  for (double& x : v) x /= n;
  return v;
}

}  // namespace detail

/// Random symmetric matrix with entries uniform in [-1,1], scaled down by
/// its spectral norm when that exceeds 1.
inline SymmetricMatrix random_symmetric(CounterRng& rng, std::size_t K) {
  Matrix a(K);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i; j < K; ++j) {
      const double x = 2.0 * rng.uniform() - 1.0;
      a(i, j) = x;
      a(j, i) = x;
    }
  SymmetricMatrix s(std::move(a));
  const double norm = spectral_norm(s);
  return norm > 1.0 ? (1.0 / norm) * s : s;
}

/// Per segment, Z = I - 2 v v^T (eigenvalue -1 along the planted direction v,
/// +1 elsewhere) plus noise times a random symmetric matrix, rescaled by
/// the spectral norm when it exceeds 1.
inline std::vector<LossMatrix> generate_matrix(const EnvironmentSpec& spec) {
  spec.validate();
  if (!spec.is_matrix()) throw std::invalid_argument("generate_matrix: environment kind is not a matrix kind");
  CounterRng rng(spec.seed);
  const std::size_t K = static_cast<std::size_t>(spec.K);
  std::vector<std::vector<double>> dirs;
  for (int s = 0; s < spec.S_true; ++s) dirs.push_back(detail::random_unit(rng, K));

  std::vector<LossMatrix> out;
  out.reserve(static_cast<std::size_t>(spec.T));
  int seg = 0;
  for (int t = 0; t < spec.T; ++t) {
    while (seg + 1 < spec.S_true && t >= detail::segment_start(seg + 1, spec.T, spec.S_true)) ++seg;
    const auto& v = dirs[static_cast<std::size_t>(seg)];
    Matrix b = Matrix::identity(K);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) b(i, j) -= 2.0 * v[i] * v[j];
    SymmetricMatrix z = SymmetricMatrix::symmetrize(b);
    if (spec.noise > 0.0) z = z + spec.noise * random_symmetric(rng, K);
    const double norm = spectral_norm(z);
    if (norm > 1.0) z = (1.0 / norm) * z;
    out.emplace_back(std::move(z));
  }
  return out;
}

/// Vector loss sequence for the vector kinds.
inline std::vector<LossVector> generate(const EnvironmentSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EnvironmentKind::piecewise_stationary: return detail::piecewise_stationary(spec);
    case EnvironmentKind::drifting: return detail::drifting(spec);
    case EnvironmentKind::small_loss: return detail::small_loss(spec);
    case EnvironmentKind::worst_case_switching: return detail::worst_case_switching(spec);
    case EnvironmentKind::matrix_piecewise: break;
  }
  throw std::invalid_argument("generate: matrix_piecewise produces loss matrices; use generate_matrix");
}

}  // namespace trackex
