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
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "metacog/radar_model.hpp"
#include "test_util.hpp"

namespace metacog {
namespace {

RadarSystem Scalar(double a, double c, double q, double r) {
  RadarSystem s;
  s.A = Eigen::MatrixXd::Constant(1, 1, a);
  s.C = Eigen::MatrixXd::Constant(1, 1, c);
  s.Q = Eigen::MatrixXd::Constant(1, 1, q);
  s.R = Eigen::MatrixXd::Constant(1, 1, r);
  return s;
}

TEST(BuildSystemTest, DiagonalSpectra) {
  const RadarSystem s = BuildSystem(Vector{1.0, 2.0}, Vector{4.0, 5.0});
  EXPECT_TRUE(s.Q.isApprox(Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix()));
  EXPECT_DOUBLE_EQ(s.R(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(s.R(1, 1), 0.2);
  EXPECT_EQ(s.R(0, 1), 0.0);
  const RadarSystem id = BuildSystem(Vector{1.0, 1.0}, Vector{1.0, 1.0});
  EXPECT_TRUE(id.Q.isIdentity());
  EXPECT_TRUE(id.R.isIdentity());
}

TEST(BuildSystemTest, EigenvaluesOfQ) {
  const Vector alpha{3.0, 0.5, 1.5};
  const RadarSystem s = BuildSystem(alpha, Vector{1.0, 1.0, 1.0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.Q);
  Vector ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
  Vector sorted = alpha;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev[i], sorted[i], 1e-14);
}

TEST(BuildSystemTest, RejectsNonpositive) {
  EXPECT_THROW(BuildSystem(Vector{1.0, 0.0}, Vector{1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(BuildSystem(Vector{1.0, 1.0}, Vector{1.0, -1.0}), std::invalid_argument);
}

TEST(KalmanStepTest, ScalarHandComputation) {
  const RadarSystem s = Scalar(1, 1, 1, 1);
  KalmanState st{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1.0), {}, 0};
  const KalmanState next = KalmanStep(s, st, Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_NEAR(next.sigma_predicted(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(next.x(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(next.sigma(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(KalmanStepTest, ZeroObservationIsPurePrediction) {
  RadarSystem s;
  s.A = Eigen::Matrix2d{{1.0, 0.5}, {0.0, 1.0}};
  s.C = Eigen::MatrixXd::Zero(2, 2);
  s.Q = Eigen::Matrix2d{{0.3, 0.0}, {0.0, 0.2}};
  s.R = Eigen::MatrixXd::Identity(2, 2);
  KalmanState st{Eigen::Vector2d(1.0, -2.0), Eigen::Matrix2d{{2.0, 0.1}, {0.1, 1.0}}, {}, 0};
  const KalmanState next = KalmanStep(s, st, Eigen::Vector2d(5.0, 5.0));
  EXPECT_TRUE(next.sigma.isApprox(s.A * st.sigma * s.A.transpose() + s.Q, 1e-14));
  EXPECT_TRUE(next.x.isApprox(s.A * st.x, 1e-14));
}

TEST(KalmanStepTest, PerfectKnowledgePersists) {
  RadarSystem s = Scalar(0.9, 1.0, 0.0, 1.0);
  KalmanState st{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), {}, 0};
  EXPECT_EQ(KalmanStep(s, st, Eigen::VectorXd::Constant(1, 3.0)).sigma(0, 0), 0.0);
}

TEST(AreTest, ScalarGoldenRatio) {
  const Eigen::MatrixXd sigma = SolveAre(Scalar(1, 1, 1, 1));
  EXPECT_NEAR(sigma(0, 0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-9);
}

TEST(AreTest, ZeroDynamicsGivesQ) {
  RadarSystem s = BuildSystem(Vector{0.7, 1.3}, Vector{2.0, 3.0}, Eigen::MatrixXd::Zero(2, 2),
                              Eigen::MatrixXd::Identity(2, 2));
  EXPECT_TRUE(SolveAre(s).isApprox(s.Q, 1e-12));
}

TEST(AreTest, MatchesKalmanRecursion) {
  Rng rng = MakeStream(3, "are");
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const RadarSystem s = BuildSystem(Vector{u(rng), u(rng)}, Vector{u(rng), u(rng)},
                                    Eigen::Matrix2d{{0.9, 0.2}, {-0.1, 0.8}},
                                    Eigen::MatrixXd::Identity(2, 2));
  const Eigen::MatrixXd sigma = SolveAre(s);
  EXPECT_LE(AreResidual(s, sigma), 1e-8);
  KalmanState st{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), {}, 0};
  for (int n = 0; n < 10000; ++n) st = KalmanStep(s, st, Eigen::VectorXd::Zero(2));
  EXPECT_LE((st.sigma_predicted - sigma).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AreTest, NonconvergenceCarriesResidual) {
  try {
    SolveAre(Scalar(1, 1, 1, 1), 1e-10, 3);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_GT(e.residual(), 1e-10);
  }
}

TEST(NaiveResponseTest, ClosedForms) {
  const Vector a = NaiveResponse(UtilityModel::SqrtSum(), Vector{1.0, 1.0});
  EXPECT_NEAR(a[0], 0.5, 1e-15);
  EXPECT_NEAR(a[1], 0.5, 1e-15);
  const Vector b = NaiveResponse(UtilityModel::SqrtSum(), Vector{1.0, 2.0});
  EXPECT_NEAR(b[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b[1], 1.0 / 6.0, 1e-15);
  const Vector c = NaiveResponse(UtilityModel::QuadSum(), Vector{1.0, 2.0});
  EXPECT_EQ(c, (Vector{1.0, 0.0}));
  EXPECT_EQ(EvalUtility(UtilityModel::QuadSum(), c), 1.0);
}

TEST(NaiveResponseTest, SqrtSumBeatsBudgetGrid) {
  const Vector alpha{1.0, 2.0};
  const Vector b = NaiveResponse(UtilityModel::SqrtSum(), alpha);
  double best = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i * 1e-3;
    best = std::max(best, testing::SqrtSumValue({x, (1.0 - x) / 2.0}));
  }
  EXPECT_GE(testing::SqrtSumValue(b), best - 1e-12);
  EXPECT_LE(testing::SqrtSumValue(b) - best, 1e-5);
}

TEST(NaiveResponseTest, PiecewiseAffineMatchesSqrtOptimumDirection) {
  // Tangent planes of sqrt-sum at its optima; the envelope optimum sits on
  // the budget face.
  VectorSeq probes{{1.0, 2.0}, {2.0, 1.0}, {1.0, 1.0}};
  std::vector<AffinePiece> pieces;
  for (const auto& a : probes) {
    const Vector b = testing::SqrtSumOptimum(a);
    const Vector g = GradUtility(UtilityModel::SqrtSum(), b);
    pieces.push_back({testing::SqrtSumValue(b), g[0] / a[0], a, b});
  }
  const auto u = UtilityModel::PiecewiseAffine(pieces);
  const Vector alpha{1.0, 1.0};
  const Vector b = NaiveResponse(u, alpha);
  EXPECT_NEAR(alpha[0] * b[0] + alpha[1] * b[1], 1.0, 1e-8);
  double best = -1e300;
  for (int i = 0; i <= 1000; ++i) best = std::max(best, EvalUtility(u, Vector{i * 1e-3, 1.0 - i * 1e-3}));
  EXPECT_GE(EvalUtility(u, b), best - 1e-6);
}

}  // namespace
}  // namespace metacog
