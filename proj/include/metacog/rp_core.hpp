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

#ifndef METACOG_RP_CORE_HPP_
#define METACOG_RP_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metacog/common.hpp"
#include "metacog/dataset.hpp"
#include "metacog/linear_program.hpp"
#include "metacog/utility.hpp"

namespace metacog {

// Square matrix stored row-major; entry (t, s) of an Afriat cost matrix is
// the coefficient c_ts in  u_s <= u_t + lambda_t c_ts.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> v;

  explicit CostMatrix(std::size_t size) : n(size), v(size * size, 0.0) {}
  double& operator()(std::size_t t, std::size_t s) { return v[t * n + s]; }
  double operator()(std::size_t t, std::size_t s) const { return v[t * n + s]; }
};

/// c_ts = alpha_t'(beta_s - beta_t) + relax for s != t, zero on the diagonal.
inline CostMatrix AfriatCosts(const ProbeResponseDataset& d, double relax = 0.0) {
  CostMatrix c(d.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    for (std::size_t s = 0; s < d.size(); ++s) {
      if (s != t) c(t, s) = d.CrossCost(t, s) + relax;
    }
  }
  return c;
}

/// Cyclical consistency of u_s <= u_t + lambda_t c_ts: no cycle of weak
/// preferences (c <= tol) closes through a strict one (c < -tol). This is
/// the combinatorial side of Afriat's theorem; O(K^3) via Warshall.
inline bool CyclicallyConsistent(const CostMatrix& c, double tol = kDefaultTol) {
  const std::size_t n = c.n;
  std::vector<char> reach(n * n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      reach[t * n + s] = (t == s || c(t, s) <= tol) ? 1 : 0;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i * n + k]) continue;
      char* row = &reach[i * n];
      const char* krow = &reach[k * n];
      for (std::size_t j = 0; j < n; ++j) row[j] |= krow[j];
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      if (reach[t * n + s] && c(s, t) < -tol) return false;
    }
  }
  return true;
}

/// GARP: transitive closure of the weak direct revealed-preference relation
/// admits no strict reversal.
inline bool CheckGarp(const ProbeResponseDataset& d, double tol = kDefaultTol) {
  return CyclicallyConsistent(AfriatCosts(d), tol);
}

struct AfriatCertificate {
  Vector u_vals;
  Vector lambda_vals;
  // min over (s, t) of -(u_s - u_t - lambda_t alpha_t'(beta_s - beta_t)).
  double slack = 0.0;
};

// Box used to make the Afriat feasibility region compact: lambda_t >= 1 and
// 1 <= u_t <= 1e6.
inline constexpr double kAfriatUtilityBound = 1e6;

/// Solves u_s - u_t - lambda_t c_ts <= 0 (s != t) over lambda_t >= 1,
/// 1 <= u_t <= 1e6 by linear programming. Coefficients within tol of zero are
/// snapped to zero so the LP agrees with the tolerance used by GARP.
/// Returns nullopt on infeasibility; throws NumericalError if the simplex
/// does not terminate.
inline std::optional<AfriatCertificate> SolveAfriatSystem(
    const CostMatrix& c, double tol = kDefaultTol) {
  const std::size_t k = c.n;
  auto snapped = [&](std::size_t t, std::size_t s) {
    const double x = c(t, s);
    return std::abs(x) <= tol ? 0.0 : x;
  };
  // Columns: v_0..v_{k-1} (u = v + 1), mu_0..mu_{k-1} (lambda = 1 + mu).
  LinearProgram lp(k * (k - 1) + k, 2 * k);
  std::size_t row = 0;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      const double cts = snapped(t, s);
      lp.at(row, s) += 1.0;
      lp.at(row, t) -= 1.0;
      lp.at(row, k + t) = -cts;
      lp.b[row] = cts;
      ++row;
    }
  }
  for (std::size_t t = 0; t < k; ++t, ++row) {
    lp.at(row, t) = 1.0;
    lp.b[row] = kAfriatUtilityBound - 1.0;
  }
  const LpResult res = SolveLinearProgram(lp);
  if (res.status == LpStatus::kInfeasible) return std::nullopt;
  if (res.status != LpStatus::kOptimal) {
    throw NumericalError("afriat feasibility: simplex did not terminate",
                         static_cast<double>(res.pivots));
  }
  AfriatCertificate cert;
  cert.u_vals.resize(k);
  cert.lambda_vals.resize(k);
  for (std::size_t t = 0; t < k; ++t) {
    cert.u_vals[t] = std::max(res.x[t], 0.0) + 1.0;
    cert.lambda_vals[t] = std::max(res.x[k + t], 0.0) + 1.0;
  }
  double slack = 0.0;  // diagonal terms
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      const double r = cert.u_vals[s] - cert.u_vals[t] -
                       cert.lambda_vals[t] * c(t, s);
      slack = std::min(slack, -r);
    }
  }
  cert.slack = slack;
  return cert;
}

inline std::optional<AfriatCertificate> AfriatFeasible(
    const ProbeResponseDataset& d, double tol = kDefaultTol) {
  return SolveAfriatSystem(AfriatCosts(d), tol);
}

/// Lower envelope min_t {u_t + lambda_t alpha_t'(beta - beta_t)}.
inline UtilityModel ReconstructUtility(const AfriatCertificate& cert,
                                       const ProbeResponseDataset& d) {
  if (cert.u_vals.size() != d.size() || cert.lambda_vals.size() != d.size()) {
    throw std::invalid_argument(
        "reconstruct_utility: certificate/dataset length mismatch");
  }
  std::vector<AffinePiece> pieces;
  pieces.reserve(d.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    pieces.push_back(AffinePiece{cert.u_vals[t], cert.lambda_vals[t],
                                 d.probe(t), d.response(t)});
  }
  return UtilityModel::PiecewiseAffine(std::move(pieces));
}

/// min over ordered pairs s != t of
///   u(beta_t) + grad u(beta_t)'(beta_s - beta_t) - u(beta_s).
/// Nonnegative for concave u. Returns +infinity when K = 1 (no pairs).
inline double AfriatMargin(const ProbeResponseDataset& d, const UtilityModel& u) {
  const std::size_t k = d.size();
  Vector val(k);
  VectorSeq grad(k);
  for (std::size_t t = 0; t < k; ++t) {
    val[t] = EvalUtility(u, d.response(t));
    grad[t] = GradUtility(u, d.response(t));
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      margin = std::min(margin, val[t] + DotDiff(grad[t], d.response(s),
                                                 d.response(t)) - val[s]);
    }
  }
  return margin;
}

}  // namespace metacog

#endif  // METACOG_RP_CORE_HPP_
