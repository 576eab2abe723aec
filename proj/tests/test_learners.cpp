#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "trackex/bounds.hpp"
#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"
#include "trackex/learners.hpp"
#include "trackex/oracles.hpp"

using namespace trackex;

namespace {

std::vector<LossVector> random_losses(std::uint64_t seed, int T, int K) {
  CounterRng rng(seed);
  std::vector<LossVector> out;
  for (int t = 0; t < T; ++t) {
    std::vector<double> l(static_cast<std::size_t>(K));
    for (double& x : l) x = rng.uniform();
    out.emplace_back(std::move(l));
  }
  return out;
}

double min_weight(const Distribution& w) { return w.min(); }

}  // namespace

TEST(LearnerProtocol, UpdateWithoutPredictThrows) {
  ClippedOmdLearner l(HorizonConfig(10, 3, 1, 0.1));
  EXPECT_THROW(l.update(LossVector::zeros(3)), std::logic_error);
  l.predict();
  EXPECT_THROW(l.update(LossVector::zeros(4)), dimension_error);
}

TEST(LearnerProtocol, PredictIsIdempotent) {
  OcsLearner l(HorizonConfig(10, 3, 1, 0.3));
  l.predict();
  l.update(LossVector({1.0, 0.0, 0.5}));
  const Distribution a = l.predict();
  const Distribution b = l.predict();
  EXPECT_EQ(a, b);
  EXPECT_EQ(l.rounds_seen(), 1);
}

TEST(LearnerProtocol, StartsUniform) {
  const HorizonConfig c(50, 5, 2, 0.2);
  std::vector<std::unique_ptr<Learner>> ls;
  ls.push_back(std::make_unique<MwuLearner>(5, 0.2));
  ls.push_back(std::make_unique<FixedShareLearner>(5, 0.2, 0.01));
  ls.push_back(std::make_unique<ProjectionUpdateLearner>(5, 0.2, c.clip_floor()));
  ls.push_back(std::make_unique<ClippedOmdLearner>(c));
  ls.push_back(std::make_unique<PcsLearner>(c));
  ls.push_back(std::make_unique<OcsLearner>(c));
  ls.push_back(std::make_unique<OcsPlusLearner>(50, 5, 2));
  for (auto& l : ls)
    for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(l->predict()[i], 0.2) << l->name();
}

TEST(ClippedLearners, StayAboveTheFloor) {
  const int T = 300, K = 6, S = 3;
  const auto losses = random_losses(31, T, K);
  const HorizonConfig c(T, K, S, 0.5);
  std::vector<std::unique_ptr<Learner>> ls;
  ls.push_back(std::make_unique<ClippedOmdLearner>(c));
  ls.push_back(std::make_unique<PcsLearner>(c));
  ls.push_back(std::make_unique<OcsLearner>(c));
  ls.push_back(std::make_unique<OcsPlusLearner>(T, K, S));
  for (auto& l : ls) {
    EXPECT_DOUBLE_EQ(l->clip_floor(), c.clip_floor());
    for (const auto& loss : losses) {
      EXPECT_GE(min_weight(l->predict()), c.clip_floor() - 1e-15) << l->name();
      l->update(loss);
    }
  }
}

TEST(ClippedOmd, ConcentratesOnTheBestExpert) {
  ClippedOmdLearner l(HorizonConfig(200, 3, 1, 0.5));
  for (int t = 0; t < 200; ++t) {
    l.predict();
    l.update(LossVector({1.0, 0.0, 1.0}));
  }
  const auto& w = l.predict();
  EXPECT_GT(w[1], 0.99);
  EXPECT_NEAR(w[0], 1.0 / 600.0, 1e-15);
}

TEST(Pcs, RejectsLargeEta) {
  EXPECT_THROW(PcsLearner(HorizonConfig(10, 2, 1, 0.6)), infeasible_error);
  EXPECT_NO_THROW(PcsLearner(HorizonConfig(10, 2, 1, 0.5)));
}

TEST(Pcs, StepMinimizesItsObjective) {
  CounterRng rng(32);
  for (int n = 0; n < 200; ++n) {
    const int K = 2 + static_cast<int>(rng.below(8));
    const int T = 20 + static_cast<int>(rng.below(100));
    const HorizonConfig c(T, K, 1 + static_cast<int>(rng.below(5)), 0.05 + 0.45 * rng.uniform());
    PcsLearner l(c);
    const auto losses = random_losses(100 + static_cast<std::uint64_t>(n), 5, K);
    Distribution prev = l.predict();
    for (const auto& loss : losses) {
      prev = l.predict();
      l.update(loss);
    }
    const auto& last = losses.back();
    std::vector<double> y(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = prev[i] * (1.0 - c.eta * last[i]);
    auto objective = [&](const std::vector<double>& w) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        s += -w[i] * std::log(1.0 - c.eta * last[i]) + w[i] * std::log(w[i] / prev[i]);
      return s;
    };
    const auto oracle_point = oracle::kl_project(y, c.clip_floor());
    const auto& ours = l.predict().vec();
    EXPECT_NEAR(objective(ours), objective(oracle_point), 1e-8);
    EXPECT_LE(objective(ours), objective(oracle_point) + 1e-12);
  }
}

TEST(Ocs, PredictionUsesPreviousLossAsHint) {
  const HorizonConfig c(100, 3, 1, 0.4);
  OcsLearner l(c);
  l.predict();
  const LossVector first({0.9, 0.1, 0.5});
  l.update(first);
  const auto expected = clipped_omd_step(*l.aux_weights(), first, c.eta, c.clip_floor());
  const auto& got = l.predict();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expected[i], 1e-15);
  EXPECT_EQ(l.last_loss(), first);
}

TEST(Ocs, ConstantLossesMatchClippedOmdAfterFirstRound) {
  const HorizonConfig c(50, 4, 1, 0.3);
  OcsLearner ocs(c);
  ClippedOmdLearner omd(c);
  const LossVector loss({0.2, 0.7, 0.4, 1.0});
  ocs.predict();
  ocs.update(loss);
  omd.predict();
  omd.update(loss);
  for (int t = 0; t < 20; ++t) {
    omd.predict();
    omd.update(loss);
    const auto& a = ocs.predict();
    const auto& b = omd.predict();
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
    ocs.update(loss);
  }
}

TEST(OcsPlus, InitialRate) {
  OcsPlusLearner l(100, 4, 2);
  EXPECT_NEAR(l.eta(), std::sqrt(2.0 * std::log(200.0)), 1e-15);
  EXPECT_EQ(l.epoch(), 1);
  EXPECT_EQ(l.epoch_start(), 0);
}

TEST(OcsPlus, ConstantLossNeverRestartsAfterTheFirstRound) {
  OcsPlusLearner l(100, 3, 1);
  const LossVector loss({0.0, 0.0, 0.0});
  for (int t = 0; t < 100; ++t) {
    l.predict();
    l.update(loss);
  }
  EXPECT_EQ(l.epoch(), 1);
  EXPECT_EQ(l.epoch_path_length(), 0.0);
}

TEST(OcsPlus, HalvesWhenPathLengthTripsTheTest) {
  const int T = 400, K = 4, S = 1;
  OcsPlusLearner l(T, K, S);
  const double budget = S * std::log(static_cast<double>(K) * T / S);
  const auto losses = random_losses(33, T, K);
  double eta = l.initial_eta();
  double path = 0.0;
  LossVector prev = LossVector::zeros(K);
  int epoch = 1;
  for (int t = 0; t < T; ++t) {
    l.predict();
    EXPECT_DOUBLE_EQ(l.eta(), eta);
    l.update(losses[t]);
    path += linf_norm_diff_sq(losses[t], prev);
    prev = losses[t];
    if (path > 0.0 && eta > std::sqrt(budget / path)) {
      eta /= 2.0;
      path = 0.0;
      ++epoch;
      EXPECT_EQ(l.epoch_start(), t + 1);
    }
    EXPECT_EQ(l.epoch(), epoch);
  }
  EXPECT_GT(epoch, 1);
  EXPECT_LE(epoch, max_epochs_theorem4(path_length(losses).P_inf, T));
}
