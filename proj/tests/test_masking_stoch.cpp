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
#include <memory>

#include <gtest/gtest.h>

#include "metacog/masking_stoch.hpp"
#include "test_util.hpp"

namespace metacog {
namespace {

class SpsaTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng prng = MakeStream(1, "probes");
    probes_ = testing::UniformProbes(6, 3, 1.0, 4.0, prng);
    naive_ = NaiveResponses(u_, probes_);
    Rng crng = MakeStream(1, "cdf");
    cdf_ = std::make_unique<EmpiricalCdfL>(
        BuildCdfL(probes_, NoiseModel::Gaussian(0.2), 5000, crng));
  }
  UtilityModel u_ = UtilityModel::SqrtSum();
  VectorSeq probes_;
  VectorSeq naive_;
  std::unique_ptr<EmpiricalCdfL> cdf_;
};

TEST_F(SpsaTest, CostAtNaiveWithoutConfusionIsZero) {
  SpsaConfig cfg;
  cfg.lambda = 0.0;
  Rng rng = MakeStream(2, "cost");
  EXPECT_EQ(EstimateCost(naive_, probes_, u_, naive_, cfg, *cdf_, rng), 0.0);
}

TEST_F(SpsaTest, LossIsNonnegativeOffNaive) {
  SpsaConfig cfg;
  cfg.lambda = 0.0;
  Rng rng = MakeStream(3, "cost");
  for (int i = 0; i < 20; ++i) {
    VectorSeq b;
    for (const auto& a : probes_) b.push_back(internal::RandomBudgetPoint(a, rng));
    EXPECT_GE(EstimateCost(b, probes_, u_, naive_, cfg, *cdf_, rng), 0.0);
  }
}

TEST_F(SpsaTest, CostIsSeeded) {
  SpsaConfig cfg;
  cfg.lambda = 10.0;
  Rng a = MakeStream(4, "cost"), b = MakeStream(4, "cost");
  EXPECT_EQ(EstimateCost(naive_, probes_, u_, naive_, cfg, *cdf_, a),
            EstimateCost(naive_, probes_, u_, naive_, cfg, *cdf_, b));
}

TEST(SpsaGradientTest, LinearCostIsExact) {
  const VectorSeq g{{1.0, -2.0, 3.0}, {0.5, 4.0, -1.0}};
  const VectorSeq b{{1.0, 2.0, 0.0}, {3.0, 1.0, 2.0}};
  auto linear = [&](const VectorSeq& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += Dot(g[k], x[k]);
    return s;
  };
  Rng rng = MakeStream(5, "delta");
  for (int trial = 0; trial < 50; ++trial) {
    const SpsaDirection d = SpsaGradient(linear, b, 0.5, rng);
    double gd = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) gd += Dot(g[k], d.delta[k]);
    for (std::size_t k = 0; k < g.size(); ++k) {
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_TRUE(d.delta[k][i] == 1.0 || d.delta[k][i] == -1.0);
        EXPECT_EQ(d.gradient[k][i], d.delta[k][i] * gd / 6.0);
      }
    }
  }
}

TEST(SpsaGradientTest, SeededDirection) {
  auto cost = [](const VectorSeq& x) { return x[0][0] * x[0][0]; };
  Rng a = MakeStream(6, "delta"), b = MakeStream(6, "delta");
  const VectorSeq x{{1.0, 2.0}};
  EXPECT_EQ(SpsaGradient(cost, x, 0.1, a).gradient, SpsaGradient(cost, x, 0.1, b).gradient);
  EXPECT_THROW(SpsaGradient(cost, x, 0.0, a), std::invalid_argument);
}

TEST_F(SpsaTest, ZeroLambdaStaysAtOptimum) {
  const EmpiricalCdfL zero(Vector(1000, 0.0), probes_, NoiseModel::Degenerate());
  SpsaConfig cfg;
  cfg.lambda = 0.0;
  cfg.iters = 1000;
  cfg.seed = 7;
  const auto r = MaskStochastic(probes_, u_, cfg, zero);
  double total = 0.0;
  for (const auto& b : naive_) total += EvalUtility(u_, b);
  EXPECT_LE(r.result.utility_loss, 1e-3 * total);
  EXPECT_GE(r.result.utility_loss, 0.0);
}

TEST_F(SpsaTest, IteratesStayOnBudgetFaces) {
  SpsaConfig cfg;
  cfg.lambda = 100.0;
  cfg.iters = 200;
  cfg.reps = 20;
  cfg.eval_reps = 50;
  cfg.trace_stride = 1;
  cfg.seed = 8;
  const auto r = MaskStochastic(probes_, u_, cfg, *cdf_);
  ASSERT_EQ(r.trace.size(), 201u);
  for (const auto& rec : r.trace) EXPECT_LE(rec.feasibility_residual, 1e-8);
  for (const auto& b : r.result.masked) {
    for (double x : b) EXPECT_GE(x, 0.0);
  }
  EXPECT_TRUE(r.result.feasible);
  EXPECT_GE(r.confusion, 0.0);
  EXPECT_LE(r.confusion, 1.0);
}

TEST_F(SpsaTest, RunIsReproducible) {
  SpsaConfig cfg;
  cfg.lambda = 10.0;
  cfg.iters = 50;
  cfg.reps = 10;
  cfg.eval_reps = 20;
  cfg.seed = 9;
  const auto a = MaskStochastic(probes_, u_, cfg, *cdf_);
  const auto b = MaskStochastic(probes_, u_, cfg, *cdf_);
  EXPECT_EQ(a.result.masked, b.result.masked);
  EXPECT_EQ(TraceToCsv(a.trace).ToString(), TraceToCsv(b.trace).ToString());
  EXPECT_EQ(TraceToCsv(a.trace).header,
            (std::vector<std::string>{"iter", "cost", "confusion", "utility_loss",
                                      "feasibility_residual"}));
}

TEST(SpsaConfigTest, Validation) {
  SpsaConfig cfg;
  cfg.iters = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.alpha = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = {};
  cfg.lambda = -1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace metacog
