#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "trackex/matrix.hpp"
#include "trackex/simplex.hpp"

namespace trackex {

// ── Vector comparator ───────────────────────────────────────────────

/// Best expert sequence with at most S-1 switches. Experts and rounds are
/// 0-based; segment_starts holds the first round of each constant run.
struct ComparatorResult {
  std::vector<int> best_sequence;
  std::vector<int> segment_starts;
  double total_loss = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  int switches_used = 0;
};

struct ComparatorStats {
  double L1 = 0.0;
  double L2 = 0.0;
};

struct PathLengthStats {
  double P_inf = 0.0;
};

namespace detail {

struct CostSwitches {
  double cost = 0.0;
  int switches = 0;
};

inline bool lex_less(const CostSwitches& a, const CostSwitches& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.switches < b.switches;
}

inline void check_losses(std::span<const LossVector> losses, int S) {
  if (losses.empty()) throw std::invalid_argument("comparator: empty loss sequence");
  if (S < 1) throw std::invalid_argument("comparator: S must be at least 1");
  const std::size_t k = losses.front().size();
  for (const auto& l : losses)
    if (l.size() != k) throw dimension_error("comparator: loss vectors differ in dimension");
}

}  // namespace detail

inline ComparatorStats comparator_stats(std::span<const LossVector> losses, const ComparatorResult& result) {
  if (result.best_sequence.size() != losses.size())
    throw dimension_error("comparator_stats: sequence length differs from the loss sequence");
  ComparatorStats s;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const double x = losses[t][static_cast<std::size_t>(result.best_sequence[t])];
    s.L1 += x;
    s.L2 += x * x;
  }
  return s;
}

/// Offline DP over (round, expert, remaining switches) computed backwards
/// so the forward reconstruction can break ties toward fewer switches and
/// then the lexicographically smallest expert sequence. O(T K S) time and
/// memory via the best/second-best trick for the switch transition.
inline ComparatorResult best_switching_sequence(std::span<const LossVector> losses, int S) {
  detail::check_losses(losses, S);
  using detail::CostSwitches;
  const std::size_t T = losses.size();
  const std::size_t K = losses.front().size();
  const std::size_t R = static_cast<std::size_t>(std::min<long long>(S - 1, static_cast<long long>(T) - 1)) + 1;

  // value[t][r][i]: best (cost, switches) over rounds t..T-1, at expert i in
  // round t, with at most r switches left.
  std::vector<CostSwitches> value(T * R * K);
  auto at = [&](std::size_t t, std::size_t r, std::size_t i) -> CostSwitches& {
    return value[(t * R + r) * K + i];
  };

  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t i = 0; i < K; ++i) at(T - 1, r, i) = {losses[T - 1][i], 0};

  struct Ranked {
    CostSwitches v;
    std::size_t index;
  };
  auto rank_less = [](const Ranked& a, const Ranked& b) {
    if (detail::lex_less(a.v, b.v)) return true;
    if (detail::lex_less(b.v, a.v)) return false;
    return a.index < b.index;
  };

  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t r = 0; r < R; ++r) {
      Ranked best{{std::numeric_limits<double>::infinity(), 0}, K};
      Ranked second = best;
      if (r >= 1) {
        for (std::size_t j = 0; j < K; ++j) {
          Ranked cand{at(t + 1, r - 1, j), j};
          if (rank_less(cand, best)) {
            second = best;
            best = cand;
          } else if (rank_less(cand, second)) {
            second = cand;
          }
        }
      }
      for (std::size_t i = 0; i < K; ++i) {
        CostSwitches next = at(t + 1, r, i);
        if (r >= 1) {
          const Ranked& other = best.index != i ? best : second;
          if (other.index < K) {
            CostSwitches sw{other.v.cost, other.v.switches + 1};
            if (detail::lex_less(sw, next)) next = sw;
          }
        }
        at(t, r, i) = {losses[t][i] + next.cost, next.switches};
      }
    }
  }

  std::size_t r = R - 1;
  std::size_t cur = 0;
  for (std::size_t i = 1; i < K; ++i)
    if (detail::lex_less(at(0, r, i), at(0, r, cur))) cur = i;

  ComparatorResult out;
  out.best_sequence.reserve(T);
  out.best_sequence.push_back(static_cast<int>(cur));
  out.segment_starts.push_back(0);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    CostSwitches choice = at(t + 1, r, cur);
    std::size_t next = cur;
    bool switched = false;
    if (r >= 1) {
      for (std::size_t j = 0; j < K; ++j) {
        if (j == cur) continue;
        const CostSwitches& v = at(t + 1, r - 1, j);
        CostSwitches sw{v.cost, v.switches + 1};
        if (detail::lex_less(sw, choice) || (!detail::lex_less(choice, sw) && j < next)) {
          choice = sw;
          next = j;
          switched = true;
        }
      }
    }
    if (switched) {
      --r;
      ++out.switches_used;
      out.segment_starts.push_back(static_cast<int>(t + 1));
    }
    cur = next;
    out.best_sequence.push_back(static_cast<int>(cur));
  }

  const ComparatorStats stats = comparator_stats(losses, out);
  out.total_loss = stats.L1;
  out.L1 = stats.L1;
  out.L2 = stats.L2;
  return out;
}

/// Sum over rounds of ||l_t - l_{t-1}||_inf^2 with l_0 = 0.
inline PathLengthStats path_length(std::span<const LossVector> losses) {
  PathLengthStats s;
  if (losses.empty()) return s;
  s.P_inf = linf_norm_diff_sq(losses[0], LossVector::zeros(losses[0].size()));
  for (std::size_t t = 1; t < losses.size(); ++t) s.P_inf += linf_norm_diff_sq(losses[t], losses[t - 1]);
  return s;
}

// ── Matrix comparator ───────────────────────────────────────────────

/// Best piecewise-constant spectraplex comparator with at most S segments.
/// Within a segment the optimum is the rank-one projector onto a minimum
/// eigenvector of the segment's summed loss matrix.
struct MatrixComparatorResult {
  std::vector<int> segment_starts;
  std::vector<std::vector<double>> unit_vectors;  // one per segment
  std::vector<int> segment_of_round;
  std::vector<double> round_losses;  // v_s^T Z_t v_s
  double total_loss = 0.0;
  double M2 = 0.0;

  const std::vector<double>& vector_at(std::size_t t) const {
    return unit_vectors[static_cast<std::size_t>(segment_of_round[t])];
  }
};

/// O(T^2 S) DP over segment breakpoints with one eigensolve per candidate
/// segment; intended for T up to a few thousand and K up to 16.
inline MatrixComparatorResult best_switching_matrix(std::span<const LossMatrix> losses, int S) {
  if (losses.empty()) throw std::invalid_argument("best_switching_matrix: empty loss sequence");
  if (S < 1) throw std::invalid_argument("best_switching_matrix: S must be at least 1");
  const std::size_t T = losses.size();
  const std::size_t K = losses.front().size();
  for (const auto& z : losses)
    if (z.size() != K) throw dimension_error("best_switching_matrix: loss matrices differ in dimension");

  // seg[a][b - a] = lambda_min(sum_{t=a}^{b} Z_t)
  std::vector<std::vector<double>> seg(T);
  for (std::size_t a = 0; a < T; ++a) {
    seg[a].resize(T - a);
    Matrix acc(K);
    for (std::size_t b = a; b < T; ++b) {
      acc += losses[b].matrix().matrix();
      seg[a][b - a] = sym_eig(SymmetricMatrix(acc)).min_value();
    }
  }

  const std::size_t max_segments = std::min<std::size_t>(static_cast<std::size_t>(S), T);
  const double inf = std::numeric_limits<double>::infinity();
  // best[k][b]: rounds 0..b covered by exactly k+1 segments; from[k][b]: start of the last one.
  std::vector<std::vector<double>> best(max_segments, std::vector<double>(T, inf));
  std::vector<std::vector<std::size_t>> from(max_segments, std::vector<std::size_t>(T, 0));
  for (std::size_t b = 0; b < T; ++b) best[0][b] = seg[0][b];
  for (std::size_t k = 1; k < max_segments; ++k)
    for (std::size_t b = k; b < T; ++b)
      for (std::size_t a = k; a <= b; ++a) {
        const double c = best[k - 1][a - 1] + seg[a][b - a];
        if (c < best[k][b]) {
          best[k][b] = c;
          from[k][b] = a;
        }
      }

  std::size_t k_best = 0;
  for (std::size_t k = 1; k < max_segments; ++k)
    if (best[k][T - 1] < best[k_best][T - 1]) k_best = k;

  std::vector<int> starts;
  for (std::size_t k = k_best, b = T - 1;; --k) {
    const std::size_t a = k == 0 ? 0 : from[k][b];
    starts.push_back(static_cast<int>(a));
    if (k == 0) break;
    b = a - 1;
  }
  std::reverse(starts.begin(), starts.end());

  MatrixComparatorResult out;
  out.segment_starts = starts;
  out.segment_of_round.assign(T, 0);
  out.round_losses.assign(T, 0.0);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t a = static_cast<std::size_t>(starts[s]);
    const std::size_t b = s + 1 < starts.size() ? static_cast<std::size_t>(starts[s + 1]) - 1 : T - 1;
    Matrix acc(K);
    for (std::size_t t = a; t <= b; ++t) acc += losses[t].matrix().matrix();
    const auto eig = sym_eig(SymmetricMatrix(acc));
    std::vector<double> v = eig.column(K - 1);
    out.total_loss += seg[a][b - a];
    for (std::size_t t = a; t <= b; ++t) {
      const Matrix& z = losses[t].matrix().matrix();
      out.segment_of_round[t] = static_cast<int>(s);
      out.round_losses[t] = quadratic_form(z, v);
      double zv2 = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < K; ++j) row += z(i, j) * v[j];
        zv2 += row * row;
      }
      out.M2 += zv2;
    }
    out.unit_vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace trackex
