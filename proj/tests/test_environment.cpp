#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"

using namespace trackex;

namespace {

EnvironmentSpec make_spec(EnvironmentKind kind, int T, int K, int S, std::uint64_t seed) {
  EnvironmentSpec s;
  s.kind = kind;
  s.T = T;
  s.K = K;
  s.S_true = S;
  s.seed = seed;
  s.noise = 0.2;
  s.leader_loss_mean = 0.1;
  return s;
}

constexpr EnvironmentKind kVectorKinds[] = {EnvironmentKind::piecewise_stationary, EnvironmentKind::drifting,
                                            EnvironmentKind::small_loss, EnvironmentKind::worst_case_switching};

}  // namespace

TEST(CounterRng, FirstOutputsAreFrozen) {
  CounterRng a(0);
  EXPECT_EQ(a.next_u64(), CounterRng::mix(0x9E3779B97F4A7C15ULL));
  EXPECT_EQ(CounterRng::mix(0), 0u);
  CounterRng b(1234), c(1234);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(b.next_u64(), c.next_u64());
  EXPECT_EQ(b.counter(), 100u);
}

TEST(CounterRng, UniformAndBelowStayInRange) {
  CounterRng rng(61);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(rng.below(7), 7u);
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(EnvironmentKind, NamesRoundTrip) {
  for (auto k : kVectorKinds) EXPECT_EQ(parse_environment_kind(to_string(k)), k);
  EXPECT_EQ(parse_environment_kind("matrix_piecewise"), EnvironmentKind::matrix_piecewise);
  EXPECT_THROW(parse_environment_kind("nope"), std::invalid_argument);
}

TEST(EnvironmentSpec, Validation) {
  auto s = make_spec(EnvironmentKind::drifting, 10, 2, 1, 0);
  EXPECT_NO_THROW(s.validate());
  s.S_true = 11;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.S_true = 1;
  s.noise = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.noise = 0.0;
  s.K = 1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Generate, ShapeAndDeterminism) {
  for (auto kind : kVectorKinds) {
    const auto s = make_spec(kind, 123, 7, 4, 62);
    const auto a = generate(s);
    const auto b = generate(s);
    ASSERT_EQ(a.size(), 123u);
    for (const auto& l : a) EXPECT_EQ(l.size(), 7u);
    EXPECT_EQ(a, b) << to_string(kind);
    auto other = s;
    other.seed = 63;
    EXPECT_NE(generate(other), a) << to_string(kind);
  }
  EXPECT_THROW(generate(make_spec(EnvironmentKind::matrix_piecewise, 10, 2, 1, 0)), std::invalid_argument);
  EXPECT_THROW(generate_matrix(make_spec(EnvironmentKind::drifting, 10, 2, 1, 0)), std::invalid_argument);
}

TEST(Generate, PiecewiseLeaderIsTheSegmentBest) {
  auto s = make_spec(EnvironmentKind::piecewise_stationary, 400, 5, 4, 64);
  s.noise = 0.0;
  const auto losses = generate(s);
  const auto cmp = best_switching_sequence(losses, 4);
  EXPECT_EQ(cmp.segment_starts, (std::vector<int>{0, 100, 200, 300}));
  EXPECT_NEAR(cmp.total_loss, 400 * 0.1, 1e-9);
  for (std::size_t t = 1; t < losses.size(); ++t)
    if (t % 100 != 0) EXPECT_EQ(losses[t], losses[t - 1]);
}

TEST(Generate, DriftStepsAreBounded) {
  auto s = make_spec(EnvironmentKind::drifting, 1000, 6, 1, 65);
  s.drift_step = 0.05;
  const auto losses = generate(s);
  for (std::size_t t = 1; t < losses.size(); ++t)
    EXPECT_LT(linf_distance(losses[t].losses(), losses[t - 1].losses()), 0.05);
}

TEST(Generate, SmallLossLeaderMeanAtMostTarget) {
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    for (double m : {0.01, 0.05, 0.3}) {
      auto s = make_spec(EnvironmentKind::small_loss, 97, 4, 3, seed);
      s.leader_loss_mean = m;
      const auto losses = generate(s);
      for (int seg = 0; seg < 3; ++seg) {
        const int begin = seg * 97 / 3, end = (seg + 1) * 97 / 3;
        // The leader is the column with the smallest segment mean.
        double best = 1e300;
        for (std::size_t i = 0; i < 4; ++i) {
          double sum = 0.0;
          for (int t = begin; t < end; ++t) sum += losses[static_cast<std::size_t>(t)][i];
          best = std::min(best, sum / (end - begin));
        }
        EXPECT_LE(best, m + 1e-12);
      }
    }
}

TEST(Generate, WorstCaseLossesAreBinary) {
  const auto losses = generate(make_spec(EnvironmentKind::worst_case_switching, 200, 4, 5, 66));
  for (const auto& l : losses)
    for (double x : l.losses()) EXPECT_TRUE(x == 0.0 || x == 1.0);
}

TEST(Generate, ConsecutiveLeadersDiffer) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto s = make_spec(EnvironmentKind::worst_case_switching, 80, 2, 8, seed);
    s.noise = 0.0;
    const auto losses = generate(s);
    std::vector<std::size_t> leaders;
    for (int seg = 0; seg < 8; ++seg) {
      std::set<std::size_t> zero_everywhere{0, 1};
      for (int t = seg * 10; t < seg * 10 + 10; ++t)
        for (std::size_t i = 0; i < 2; ++i)
          if (losses[static_cast<std::size_t>(t)][i] != 0.0) zero_everywhere.erase(i);
      ASSERT_FALSE(zero_everywhere.empty());
      if (zero_everywhere.size() == 1) leaders.push_back(*zero_everywhere.begin());
      else leaders.push_back(99);
    }
    for (std::size_t s2 = 1; s2 < leaders.size(); ++s2)
      if (leaders[s2] != 99 && leaders[s2 - 1] != 99) EXPECT_NE(leaders[s2], leaders[s2 - 1]);
  }
}

TEST(GenerateMatrix, SpectralNormAtMostOne) {
  auto s = make_spec(EnvironmentKind::matrix_piecewise, 50, 6, 2, 67);
  s.noise = 0.5;
  const auto losses = generate_matrix(s);
  ASSERT_EQ(losses.size(), 50u);
  for (const auto& z : losses) {
    EXPECT_LE(spectral_norm(z.matrix()), 1.0 + 1e-12);
    EXPECT_EQ(z.size(), 6u);
  }
}

TEST(RandomSymmetric, NormAtMostOne) {
  CounterRng rng(68);
  for (int n = 0; n < 100; ++n) EXPECT_LE(spectral_norm(random_symmetric(rng, 1 + rng.below(10))), 1.0 + 1e-12);
}
