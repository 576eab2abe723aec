#include <gtest/gtest.h>

#include <vector>

#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"
#include "trackex/oracles.hpp"
#include "trackex/property_suite.hpp"

using namespace trackex;

namespace {

std::vector<LossVector> rows(std::initializer_list<std::vector<double>> r) {
  std::vector<LossVector> out;
  for (const auto& x : r) out.emplace_back(x);
  return out;
}

}  // namespace

TEST(BestSwitchingSequence, FourRoundExample) {
  const auto losses = rows({{0, 1}, {0, 1}, {1, 0}, {1, 0}});
  const auto r = best_switching_sequence(losses, 2);
  EXPECT_EQ(r.best_sequence, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(r.segment_starts, (std::vector<int>{0, 2}));
  EXPECT_EQ(r.total_loss, 0.0);
  EXPECT_EQ(r.L1, 0.0);
  EXPECT_EQ(r.L2, 0.0);
  EXPECT_EQ(r.switches_used, 1);
}

TEST(BestSwitchingSequence, SingleSegmentIsStaticBestExpert) {
  const auto losses = rows({{0.9, 0.1, 0.5}, {0.8, 0.3, 0.1}, {0.7, 0.2, 0.6}});
  const auto r = best_switching_sequence(losses, 1);
  EXPECT_EQ(r.best_sequence, (std::vector<int>{1, 1, 1}));
  EXPECT_NEAR(r.total_loss, 0.6, 1e-15);
  EXPECT_EQ(r.switches_used, 0);
}

TEST(BestSwitchingSequence, UnlimitedBudgetFollowsPerRoundMinimum) {
  const auto losses = rows({{0.9, 0.1, 0.5}, {0.8, 0.3, 0.1}, {0.05, 0.2, 0.6}, {0.5, 0.4, 0.3}});
  const auto r = best_switching_sequence(losses, 10);
  EXPECT_EQ(r.best_sequence, (std::vector<int>{1, 2, 0, 2}));
  EXPECT_NEAR(r.total_loss, 0.55, 1e-15);
  EXPECT_NEAR(r.L2, 0.01 + 0.01 + 0.0025 + 0.09, 1e-15);
}

TEST(BestSwitchingSequence, TiesPreferFewerSwitchesThenSmallerIndex) {
  const auto zeros = rows({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto r = best_switching_sequence(zeros, 3);
  EXPECT_EQ(r.best_sequence, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(r.switches_used, 0);
  EXPECT_EQ(r.segment_starts, (std::vector<int>{0}));

  const auto late = rows({{1, 0}, {0, 0}, {0, 0}});
  const auto s = best_switching_sequence(late, 2);
  EXPECT_EQ(s.best_sequence, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(s.switches_used, 0);
}

TEST(BestSwitchingSequence, RejectsBadInput) {
  EXPECT_THROW(best_switching_sequence(std::vector<LossVector>{}, 1), std::invalid_argument);
  EXPECT_THROW(best_switching_sequence(rows({{0, 1}}), 0), std::invalid_argument);
  EXPECT_THROW(best_switching_sequence(rows({{0, 1}, {0, 1, 0}}), 1), dimension_error);
}

TEST(BestSwitchingSequence, MatchesExhaustiveEnumeration) {
  CounterRng rng(51);
  for (int n = 0; n < 300; ++n) {
    const int T = 1 + static_cast<int>(rng.below(7));
    const int K = 2 + static_cast<int>(rng.below(2));
    const int S = 1 + static_cast<int>(rng.below(4));
    std::vector<LossVector> losses;
    for (int t = 0; t < T; ++t) {
      std::vector<double> l(static_cast<std::size_t>(K));
      for (double& x : l) x = static_cast<double>(rng.below(5)) / 4.0;
      losses.emplace_back(std::move(l));
    }
    const auto dp = best_switching_sequence(losses, S);
    const auto brute = properties::brute_force_best_sequence(losses, S);
    EXPECT_EQ(dp.total_loss, brute.cost);
    EXPECT_EQ(dp.switches_used, brute.switches);
    EXPECT_EQ(dp.best_sequence, brute.sequence);
    EXPECT_LE(dp.switches_used, S - 1);
  }
}

TEST(BestSwitchingSequence, MoreBudgetNeverHurts) {
  EnvironmentSpec spec;
  spec.T = 300;
  spec.K = 5;
  spec.S_true = 4;
  spec.seed = 52;
  spec.noise = 0.3;
  spec.leader_loss_mean = 0.1;
  const auto losses = generate(spec);
  double prev = best_switching_sequence(losses, 1).total_loss;
  for (int S = 2; S <= 10; ++S) {
    const double cur = best_switching_sequence(losses, S).total_loss;
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(ComparatorStats, Examples) {
  const auto ones = rows({{1, 1}, {1, 1}, {1, 1}});
  const auto r = best_switching_sequence(ones, 2);
  const auto s = comparator_stats(ones, r);
  EXPECT_EQ(s.L1, 3.0);
  EXPECT_EQ(s.L2, 3.0);
  ComparatorResult wrong;
  wrong.best_sequence = {0};
  EXPECT_THROW(comparator_stats(ones, wrong), dimension_error);
}

TEST(PathLength, StartsFromZeroLoss) {
  const auto losses = rows({{0.5, 0.2}, {0.5, 0.2}, {0.1, 0.6}});
  EXPECT_NEAR(path_length(losses).P_inf, 0.25 + 0.0 + 0.16, 1e-15);
  EXPECT_EQ(path_length(std::vector<LossVector>{}).P_inf, 0.0);
  EXPECT_EQ(path_length(rows({{0, 0}, {0, 0}})).P_inf, 0.0);
}

TEST(BestSwitchingMatrix, DiagonalLossesMatchVectorComparator) {
  CounterRng rng(53);
  for (int n = 0; n < 40; ++n) {
    const int T = 2 + static_cast<int>(rng.below(10));
    const int K = 2 + static_cast<int>(rng.below(3));
    const int S = 1 + static_cast<int>(rng.below(3));
    std::vector<LossVector> vec;
    std::vector<LossMatrix> mat;
    for (int t = 0; t < T; ++t) {
      vec.push_back(properties::random_loss(rng, static_cast<std::size_t>(K)));
      mat.push_back(LossMatrix::diagonal(vec.back()));
    }
    EXPECT_NEAR(best_switching_matrix(mat, S).total_loss, best_switching_sequence(vec, S).total_loss, 1e-10);
  }
}

TEST(BestSwitchingMatrix, MatchesExhaustiveEnumeration) {
  CounterRng rng(54);
  for (int n = 0; n < 60; ++n) {
    const int T = 1 + static_cast<int>(rng.below(8));
    const std::size_t K = 2 + rng.below(3);
    const int S = 1 + static_cast<int>(rng.below(4));
    std::vector<LossMatrix> mat;
    for (int t = 0; t < T; ++t) mat.emplace_back(random_symmetric(rng, K));
    const auto r = best_switching_matrix(mat, S);
    EXPECT_NEAR(r.total_loss, oracle::brute_force_matrix(mat, S), 1e-9);
    EXPECT_LE(r.segment_starts.size(), static_cast<std::size_t>(S));
    double sum = 0.0;
    for (double x : r.round_losses) sum += x;
    EXPECT_NEAR(sum, r.total_loss, 1e-9);
    for (const auto& v : r.unit_vectors) {
      double n2 = 0.0;
      for (double x : v) n2 += x * x;
      EXPECT_NEAR(n2, 1.0, 1e-12);
    }
  }
}

TEST(BestSwitchingMatrix, RecoversPlantedSegments) {
  EnvironmentSpec spec;
  spec.kind = EnvironmentKind::matrix_piecewise;
  spec.T = 60;
  spec.K = 3;
  spec.S_true = 3;
  spec.seed = 55;
  const auto losses = generate_matrix(spec);
  const auto r = best_switching_matrix(losses, 3);
  EXPECT_EQ(r.segment_starts, (std::vector<int>{0, 20, 40}));
  EXPECT_NEAR(r.total_loss, -60.0, 1e-9);
  EXPECT_NEAR(r.M2, 60.0, 1e-9);
}
