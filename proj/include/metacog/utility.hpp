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

#ifndef METACOG_UTILITY_HPP_
#define METACOG_UTILITY_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metacog/common.hpp"

namespace metacog {

enum class UtilityFamily { kSqrtSum, kQuadSum, kPiecewiseAffine };

inline std::string_view FamilyName(UtilityFamily f) {
  switch (f) {
    case UtilityFamily::kSqrtSum:
      return "sqrt_sum";
    case UtilityFamily::kQuadSum:
      return "quad_sum";
    case UtilityFamily::kPiecewiseAffine:
      return "piecewise_affine";
  }
  return "unknown";
}

inline UtilityFamily ParseFamily(std::string_view name) {
  if (name == "sqrt_sum" || name == "sqrt") return UtilityFamily::kSqrtSum;
  if (name == "quad_sum" || name == "quad") return UtilityFamily::kQuadSum;
  if (name == "piecewise_affine") return UtilityFamily::kPiecewiseAffine;
  throw std::invalid_argument("unknown utility family '" + std::string(name) +
                              "'");
}

// One piece u_t + lambda_t alpha_t'(beta - beta_t) of a reconstructed utility.
struct AffinePiece {
  double level = 0.0;       // u_t
  double multiplier = 1.0;  // lambda_t
  Vector probe;             // alpha_t
  Vector anchor;            // beta_t
};

/// A utility over responses beta in R^m_+.
///
/// SqrtSum is sum_i sqrt(beta_i), QuadSum is sum_i beta_i^2 and
/// PiecewiseAffine is the lower envelope min_t {u_t + lambda_t alpha_t'(beta -
/// beta_t)} produced by Afriat reconstruction. The first two accept any m.
class UtilityModel {
 public:
  static UtilityModel SqrtSum() { return UtilityModel(UtilityFamily::kSqrtSum, {}); }
  static UtilityModel QuadSum() { return UtilityModel(UtilityFamily::kQuadSum, {}); }
  static UtilityModel PiecewiseAffine(std::vector<AffinePiece> pieces) {
    if (pieces.empty()) {
      throw std::invalid_argument("piecewise-affine utility needs >= 1 piece");
    }
    const std::size_t m = pieces.front().probe.size();
    for (const auto& p : pieces) {
      if (p.probe.size() != m || p.anchor.size() != m) {
        throw std::invalid_argument("piecewise-affine: inconsistent dimension");
      }
      if (!(p.multiplier > 0.0)) {
        throw std::invalid_argument("piecewise-affine: lambda must be > 0");
      }
      for (double a : p.probe) {
        if (!(a > 0.0)) {
          throw std::invalid_argument("piecewise-affine: alpha must be > 0");
        }
      }
    }
    return UtilityModel(UtilityFamily::kPiecewiseAffine, std::move(pieces));
  }
  static UtilityModel FromFamily(UtilityFamily f) {
    if (f == UtilityFamily::kPiecewiseAffine) {
      throw std::invalid_argument("piecewise-affine utility needs pieces");
    }
    return UtilityModel(f, {});
  }

  UtilityFamily family() const { return family_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }

  // Index of the piece attaining the envelope minimum; lowest index on ties.
  std::size_t ActivePiece(std::span<const double> beta) const {
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < pieces_.size(); ++t) {
      const auto& p = pieces_[t];
      const double v = p.level + p.multiplier * DotDiff(p.probe, beta, p.anchor);
      if (v < best_val) {
        best_val = v;
        best = t;
      }
    }
    return best;
  }

 private:
  UtilityModel(UtilityFamily f, std::vector<AffinePiece> pieces)
      : family_(f), pieces_(std::move(pieces)) {}

  UtilityFamily family_;
  std::vector<AffinePiece> pieces_;
};

namespace internal {

inline void CheckDomain(const UtilityModel& u, std::span<const double> beta) {
  if (beta.empty()) throw std::invalid_argument("utility: empty response");
  if (u.family() == UtilityFamily::kPiecewiseAffine &&
      beta.size() != u.pieces().front().probe.size()) {
    throw std::invalid_argument("utility: dimension mismatch");
  }
  for (double b : beta) {
    if (b < 0.0) throw std::domain_error("utility: negative response component");
  }
}

}  // namespace internal

inline double EvalUtility(const UtilityModel& u, std::span<const double> beta) {
  internal::CheckDomain(u, beta);
  switch (u.family()) {
    case UtilityFamily::kSqrtSum: {
      double s = 0.0;
      for (double b : beta) s += std::sqrt(b);
      return s;
    }
    case UtilityFamily::kQuadSum:
      return SquaredNorm(beta);
    case UtilityFamily::kPiecewiseAffine: {
      const auto& p = u.pieces()[u.ActivePiece(beta)];
      return p.level + p.multiplier * DotDiff(p.probe, beta, p.anchor);
    }
  }
  return 0.0;
}

/// Gradient of u at beta. For the piecewise-affine envelope this is the
/// gradient of the active piece. SqrtSum is singular on the boundary and
/// throws std::domain_error there.
inline Vector GradUtility(const UtilityModel& u, std::span<const double> beta) {
  internal::CheckDomain(u, beta);
  Vector g(beta.size());
  switch (u.family()) {
    case UtilityFamily::kSqrtSum:
      for (std::size_t i = 0; i < beta.size(); ++i) {
        if (beta[i] == 0.0) {
          throw std::domain_error("sqrt_sum gradient undefined at zero component");
        }
        g[i] = 0.5 / std::sqrt(beta[i]);
      }
      break;
    case UtilityFamily::kQuadSum:
      for (std::size_t i = 0; i < beta.size(); ++i) g[i] = 2.0 * beta[i];
      break;
    case UtilityFamily::kPiecewiseAffine: {
      const auto& p = u.pieces()[u.ActivePiece(beta)];
      for (std::size_t i = 0; i < beta.size(); ++i) g[i] = p.multiplier * p.probe[i];
      break;
    }
  }
  return g;
}

// u evaluated at the componentwise clamp max(beta, 0). Noisy measurements and
// SPSA trial points can leave the orthant; this is how they are scored.
inline double EvalUtilityClamped(const UtilityModel& u,
                                 std::span<const double> beta) {
  if (u.family() == UtilityFamily::kSqrtSum) {
    double s = 0.0;
    for (double b : beta) s += b > 0.0 ? std::sqrt(b) : 0.0;
    return s;
  }
  if (u.family() == UtilityFamily::kQuadSum) {
    double s = 0.0;
    for (double b : beta) s += b > 0.0 ? b * b : 0.0;
    return s;
  }
  Vector c(beta.begin(), beta.end());
  for (double& x : c) x = std::max(x, 0.0);
  return EvalUtility(u, c);
}

// Gradient with components floored at `floor` so the sqrt singularity stays
// finite inside iterative solvers.
inline Vector GradUtilityFloored(const UtilityModel& u,
                                 std::span<const double> beta,
                                 double floor = 1e-12) {
  Vector c(beta.begin(), beta.end());
  for (double& x : c) x = std::max(x, floor);
  return GradUtility(u, c);
}

}  // namespace metacog

#endif  // METACOG_UTILITY_HPP_
