// Copyright 2026 The metacog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "metacog/masking_det.hpp"
#include "test_util.hpp"

namespace metacog {
namespace {

VectorSeq Probes(std::size_t k, std::uint64_t seed) {
  Rng rng = MakeStream(seed, "probes");
  return testing::UniformProbes(k, 2, 0.2, 2.5, rng);
}

// Independent oracle for m = 2: for every ordered pair, scan both budget
// segments on a grid and keep the cheapest point whose pair term is <= eps.
double PairGridOracle(const VectorSeq& probes, double eps, int n) {
  const std::size_t k = probes.size();
  VectorSeq naive;
  for (const auto& a : probes) naive.push_back(testing::SqrtSumOptimum(a));
  auto seg = [&](std::size_t q, int i) {
    const double x = (1.0 / probes[q][0]) * i / n;
    return Vector{x, std::max(0.0, (1.0 - probes[q][0] * x) / probes[q][1])};
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < k; ++t) {
    const Vector c{0.5 / std::sqrt(naive[t][0]), 0.5 / std::sqrt(naive[t][1])};
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      for (int i = 0; i <= n; ++i) {
        const Vector zs = seg(s, i);
        const double ds = SquaredDistance(zs, naive[s]);
        if (ds >= best) continue;
        for (int j = 0; j <= n; ++j) {
          const Vector zt = seg(t, j);
          const double g = testing::SqrtSumValue(zt) - testing::SqrtSumValue(zs) +
                           c[0] * (zs[0] - zt[0]) + c[1] * (zs[1] - zt[1]);
          if (g <= eps) best = std::min(best, ds + SquaredDistance(zt, naive[t]));
        }
      }
    }
  }
  return best;
}

TEST(EpsilonMaxTest, IdenticalProbesGiveZero) {
  EXPECT_EQ(EpsilonMax({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}, UtilityModel::SqrtSum()), 0.0);
}

TEST(EpsilonMaxTest, HandTwoEpochValue) {
  const Vector b1{0.5, 0.5}, b2{2.0 / 3.0, 1.0 / 6.0};
  auto term = [](const Vector& bt, const Vector& bs) {
    return testing::SqrtSumValue(bt) - testing::SqrtSumValue(bs) +
           (bs[0] - bt[0]) / (2 * std::sqrt(bt[0])) + (bs[1] - bt[1]) / (2 * std::sqrt(bt[1]));
  };
  EXPECT_NEAR(EpsilonMax({{1.0, 1.0}, {1.0, 2.0}}, UtilityModel::SqrtSum()),
              std::min(term(b1, b2), term(b2, b1)), 1e-14);
}

TEST(EpsilonMaxTest, ConcaveNonnegativeAndErrors) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_GE(EpsilonMax(Probes(10, seed), UtilityModel::SqrtSum()), 0.0);
  }
  EXPECT_THROW(EpsilonMax({{1.0, 1.0}}, UtilityModel::SqrtSum()), std::invalid_argument);
}

TEST(MaskDeterministicTest, AtEpsilonMaxNoPerturbation) {
  const auto probes = Probes(8, 1);
  const auto u = UtilityModel::SqrtSum();
  DetMaskConfig cfg;
  for (double scale : {1.0, 2.0}) {
    cfg.epsilon = scale * EpsilonMax(probes, u);
    const MaskingResult r = MaskDeterministic(probes, u, cfg);
    EXPECT_EQ(r.perturbation, 0.0);
    EXPECT_EQ(r.masked, NaiveResponses(u, probes));
    EXPECT_TRUE(r.feasible);
  }
}

TEST(MaskDeterministicTest, ZeroEpsilonBreaksStrictPass) {
  const auto probes = Probes(8, 2);
  const auto u = UtilityModel::SqrtSum();
  DetMaskConfig cfg;
  cfg.epsilon = 0.0;
  const MaskingResult r = MaskDeterministic(probes, u, cfg);
  EXPECT_TRUE(r.feasible);
  EXPECT_GT(r.perturbation, 0.0);
  EXPECT_LE(r.achieved_margin, cfg.tol);
  EXPECT_LE(BudgetResidual(r.masked, probes), 1e-8);
  EXPECT_NEAR(r.achieved_margin, PassMargin(r.masked, NaiveResponses(u, probes), u), 0.0);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_NEAR(r.diagnostics[0], r.perturbation, 1e-12);
}

TEST(MaskDeterministicTest, MatchesPairGridOracle) {
  const auto probes = Probes(4, 3);
  const auto u = UtilityModel::SqrtSum();
  const double eps_max = EpsilonMax(probes, u);
  for (double frac : {0.0, 0.5}) {
    DetMaskConfig cfg;
    cfg.epsilon = frac * eps_max;
    const MaskingResult r = MaskDeterministic(probes, u, cfg);
    const double oracle = PairGridOracle(probes, cfg.epsilon, 2000);
    EXPECT_LE(r.perturbation, oracle * (1.0 + 1e-9));
    EXPECT_GE(r.perturbation, 0.9 * oracle);
  }
}

TEST(MaskDeterministicTest, CappedPairsNeverBeatFullEnumeration) {
  const auto probes = Probes(9, 4);
  const auto u = UtilityModel::SqrtSum();
  DetMaskConfig pruned, full;
  pruned.max_pairs = 8;
  full.max_pairs = 0;
  const MaskingResult a = MaskDeterministic(probes, u, pruned);
  const MaskingResult b = MaskDeterministic(probes, u, full);
  EXPECT_TRUE(a.feasible);
  EXPECT_GE(a.perturbation, b.perturbation - 1e-15);
}

TEST(MaskDeterministicTest, HigherDimensionPenaltyPath) {
  Rng rng = MakeStream(8, "probes");
  const auto probes = testing::UniformProbes(5, 3, 0.5, 2.5, rng);
  const auto u = UtilityModel::SqrtSum();
  DetMaskConfig cfg;
  cfg.epsilon = 0.5 * EpsilonMax(probes, u);
  const MaskingResult r = MaskDeterministic(probes, u, cfg);
  EXPECT_TRUE(r.feasible);
  EXPECT_GT(r.perturbation, 0.0);
  EXPECT_LE(r.achieved_margin, cfg.epsilon + cfg.tol);
  EXPECT_LE(BudgetResidual(r.masked, probes), 1e-8);
  EXPECT_EQ(r.diagnostics.size(), 5u);
  double best = std::numeric_limits<double>::infinity();
  for (double d : r.diagnostics) best = std::min(best, d);
  EXPECT_NEAR(best, r.perturbation, 1e-12);
}

TEST(MaskDeterministicTest, NonincreasingInEpsilon) {
  const auto probes = Probes(12, 5);
  const auto u = UtilityModel::SqrtSum();
  const double eps_max = EpsilonMax(probes, u);
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 10; ++j) {
    DetMaskConfig cfg;
    cfg.epsilon = eps_max * j / 10.0;
    const MaskingResult r = MaskDeterministic(probes, u, cfg);
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(r.perturbation, prev + 1e-6);
    for (const auto& b : r.masked) {
      for (double x : b) EXPECT_GE(x, 0.0);
    }
    EXPECT_LE(BudgetResidual(r.masked, probes), 1e-8);
    prev = r.perturbation;
  }
}

TEST(MaskDeterministicTest, SeededDeterminism) {
  const auto probes = Probes(10, 6);
  DetMaskConfig cfg;
  cfg.seed = 42;
  const MaskingResult a = MaskDeterministic(probes, UtilityModel::SqrtSum(), cfg);
  const MaskingResult b = MaskDeterministic(probes, UtilityModel::SqrtSum(), cfg);
  EXPECT_EQ(a.masked, b.masked);
  EXPECT_EQ(a.diagnostics, b.diagnostics);
}

TEST(MaskDeterministicTest, ConvexUtilityHasNegativeMarginAndNoPerturbation) {
  const auto probes = Probes(10, 7);
  const auto u = UtilityModel::QuadSum();
  const double eps_max = EpsilonMax(probes, u);
  EXPECT_LT(eps_max, 0.0);
  DetMaskConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_EQ(MaskDeterministic(probes, u, cfg).perturbation, 0.0);
}

TEST(MaskDeterministicTest, ConfigValidation) {
  DetMaskConfig cfg;
  cfg.starts = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = std::nan("");
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_THROW(MaskDeterministic({{1.0, 1.0}}, UtilityModel::SqrtSum(), {}),
               std::invalid_argument);
}

}  // namespace
}  // namespace metacog
