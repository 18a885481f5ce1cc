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

#ifndef METACOG_RADAR_MODEL_HPP_
#define METACOG_RADAR_MODEL_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "metacog/common.hpp"
#include "metacog/projection.hpp"
#include "metacog/utility.hpp"

namespace metacog {

/// Linear-Gaussian tracker whose noise covariances are set by the probe
/// (Q = diag(alpha)) and the response (R^-1 = diag(beta)).
struct RadarSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::VectorXd x0;
  Eigen::MatrixXd sigma0;
};

struct KalmanState {
  Eigen::VectorXd x;
  Eigen::MatrixXd sigma;            // filtered covariance
  Eigen::MatrixXd sigma_predicted;  // last one-step prediction
  long n = 0;
};

/// Block-diagonal constant-velocity dynamics [[1, T], [0, 1]] per spatial
/// axis. An odd trailing state gets a random-walk block [1].
inline Eigen::MatrixXd ConstantVelocityMatrix(Eigen::Index dim,
                                              double period = 1.0) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index i = 0; i + 1 < dim; i += 2) a(i, i + 1) = period;
  return a;
}

inline RadarSystem BuildSystem(std::span<const double> alpha,
                               std::span<const double> beta,
                               const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& c) {
  const auto x = static_cast<Eigen::Index>(alpha.size());
  const auto y = static_cast<Eigen::Index>(beta.size());
  if (a.rows() != x || a.cols() != x) {
    throw std::invalid_argument("build_system: A must be " + std::to_string(x) +
                                "x" + std::to_string(x));
  }
  if (c.rows() != y || c.cols() != x) {
    throw std::invalid_argument("build_system: C must be " + std::to_string(y) +
                                "x" + std::to_string(x));
  }
  RadarSystem s;
  s.A = a;
  s.C = c;
  s.Q = Eigen::MatrixXd::Zero(x, x);
  s.R = Eigen::MatrixXd::Zero(y, y);
  for (Eigen::Index i = 0; i < x; ++i) {
    if (!(alpha[i] > 0.0)) {
      throw std::invalid_argument("build_system: probe components must be > 0");
    }
    s.Q(i, i) = alpha[i];
  }
  for (Eigen::Index i = 0; i < y; ++i) {
    if (!(beta[i] > 0.0)) {
      throw std::invalid_argument(
          "build_system: response components must be > 0");
    }
    s.R(i, i) = 1.0 / beta[i];
  }
  s.x0 = Eigen::VectorXd::Zero(x);
  s.sigma0 = Eigen::MatrixXd::Identity(x, x);
  return s;
}

inline RadarSystem BuildSystem(std::span<const double> alpha,
                               std::span<const double> beta) {
  const auto x = static_cast<Eigen::Index>(alpha.size());
  return BuildSystem(alpha, beta, ConstantVelocityMatrix(x),
                     Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(beta.size()), x));
}

/// One predict/update cycle of the Kalman filter.
inline KalmanState KalmanStep(const RadarSystem& s, const KalmanState& st,
                              const Eigen::VectorXd& y) {
  KalmanState next;
  next.sigma_predicted = s.A * st.sigma * s.A.transpose() + s.Q;
  const Eigen::MatrixXd innov = s.C * next.sigma_predicted * s.C.transpose() + s.R;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(innov);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    throw NumericalError("kalman_step: singular innovation covariance", 0.0);
  }
  // gain = Sigma_{n+1|n} C' innov^-1
  const Eigen::MatrixXd gain =
      ldlt.solve(s.C * next.sigma_predicted.transpose()).transpose();
  const Eigen::VectorXd x_pred = s.A * st.x;
  next.x = x_pred + gain * (y - s.C * x_pred);
  const auto n = s.A.rows();
  Eigen::MatrixXd sigma =
      (Eigen::MatrixXd::Identity(n, n) - gain * s.C) * next.sigma_predicted;
  next.sigma = 0.5 * (sigma + sigma.transpose());
  next.n = st.n + 1;
  return next;
}

// One application of the Riccati map
//   Sigma -> A (Sigma - Sigma C'[C Sigma C' + R]^-1 C Sigma) A' + Q.
inline Eigen::MatrixXd RiccatiMap(const RadarSystem& s,
                                  const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd innov = s.C * sigma * s.C.transpose() + s.R;
  const Eigen::MatrixXd cs = s.C * sigma;
  const Eigen::MatrixXd filtered =
      sigma - cs.transpose() * innov.ldlt().solve(cs);
  Eigen::MatrixXd next = s.A * filtered * s.A.transpose() + s.Q;
  return 0.5 * (next + next.transpose());
}

// -Sigma + RiccatiMap(Sigma), max-abs entry.
inline double AreResidual(const RadarSystem& s, const Eigen::MatrixXd& sigma) {
  return (RiccatiMap(s, sigma) - sigma).cwiseAbs().maxCoeff();
}

/// Steady-state predicted covariance by fixed-point iteration of the Riccati
/// map from Sigma = Q. Throws NumericalError carrying the last residual when
/// max_iter is exhausted.
inline Eigen::MatrixXd SolveAre(const RadarSystem& s, double tol = 1e-10,
                                long max_iter = 100000) {
  Eigen::MatrixXd sigma = s.Q;
  double residual = std::numeric_limits<double>::infinity();
  for (long it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = RiccatiMap(s, sigma);
    if (!next.allFinite()) break;
    sigma = std::move(next);
    residual = AreResidual(s, sigma);
    if (residual <= tol) return sigma;
  }
  throw NumericalError("solve_are: no convergence, residual " +
                           std::to_string(residual),
                       residual);
}

/// Fully cognitive response argmax {u(b) : alpha'b <= 1, b >= 0}.
///
/// SqrtSum uses the KKT closed form b_i = alpha_i^-2 / sum_j alpha_j^-1.
/// QuadSum is convex, so the maximum sits on a budget vertex e_i / alpha_i;
/// the vertex with the largest 1/alpha_i^2 wins (lowest index on ties). Other
/// families fall back to projected (super)gradient ascent on the budget face.
inline Vector NaiveResponse(const UtilityModel& u, std::span<const double> alpha) {
  const std::size_t m = alpha.size();
  if (m == 0) throw std::invalid_argument("naive_response: empty probe");
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("naive_response: alpha must be > 0");
  }
  Vector b(m, 0.0);
  switch (u.family()) {
    case UtilityFamily::kSqrtSum: {
      double inv_sum = 0.0;
      for (double a : alpha) inv_sum += 1.0 / a;
      for (std::size_t i = 0; i < m; ++i) b[i] = 1.0 / (alpha[i] * alpha[i] * inv_sum);
      return b;
    }
    case UtilityFamily::kQuadSum: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < m; ++i) {
        if (alpha[i] < alpha[best]) best = i;
      }
      b[best] = 1.0 / alpha[best];
      return b;
    }
    case UtilityFamily::kPiecewiseAffine:
      break;
  }
  // Start at the budget-face barycentre and ascend with decaying steps,
  // keeping the best iterate.
  for (std::size_t i = 0; i < m; ++i) b[i] = 1.0 / (static_cast<double>(m) * alpha[i]);
  Vector best = b;
  double best_val = EvalUtility(u, b);
  for (int it = 0; it < 20000; ++it) {
    const Vector g = GradUtility(u, b);
    const double gn = std::sqrt(SquaredNorm(g));
    if (gn == 0.0) break;
    const double step = 0.1 / (gn * std::sqrt(1.0 + it));
    Vector trial(m);
    for (std::size_t i = 0; i < m; ++i) trial[i] = b[i] + step * g[i];
    Vector next = ProjectBudget(trial, alpha);
    if (SquaredDistance(next, b) < 1e-16 * (1.0 + SquaredNorm(b))) {
      b = std::move(next);
      break;
    }
    b = std::move(next);
    const double v = EvalUtility(u, b);
    if (v > best_val) {
      best_val = v;
      best = b;
    }
  }
  return EvalUtility(u, b) >= best_val ? b : best;
}

}  // namespace metacog

#endif  // METACOG_RADAR_MODEL_HPP_
