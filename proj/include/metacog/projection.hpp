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

#ifndef METACOG_PROJECTION_HPP_
#define METACOG_PROJECTION_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include "metacog/common.hpp"

namespace metacog {

/// Euclidean projection of v onto the budget face S = {b >= 0 : alpha'b = 1}.
///
/// The projection has the form b(mu) = max(0, v - mu alpha). The multiplier
/// is bracketed by bisection on the monotone map mu -> alpha'b(mu); once the
/// active set is pinned down, mu is recomputed in closed form on that set so
/// the budget holds to rounding.
inline Vector ProjectBudget(std::span<const double> v,
                            std::span<const double> alpha) {
  const std::size_t m = v.size();
  if (alpha.size() != m || m == 0) {
    throw std::invalid_argument("project_budget: dimension mismatch");
  }
  double av = 0.0, aa = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(alpha[i] > 0.0)) {
      throw std::invalid_argument("project_budget: alpha must be > 0");
    }
    av += alpha[i] * v[i];
    aa += alpha[i] * alpha[i];
    min_ratio = std::min(min_ratio, v[i] / alpha[i]);
    max_ratio = std::max(max_ratio, v[i] / alpha[i]);
  }
  auto spend = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      s += alpha[i] * std::max(0.0, v[i] - mu * alpha[i]);
    }
    return s;
  };
  double lo = std::min(min_ratio, (av - 1.0) / aa) - 1.0;  // spend(lo) >= 1
  double hi = max_ratio;                                    // spend(hi) == 0
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (spend(mid) >= 1.0 ? lo : hi) = mid;
  }
  // Closed form on the active set {i : v_i - mu alpha_i > 0} at the bracket.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (v[i] - lo * alpha[i] > 0.0) {
      num += alpha[i] * v[i];
      den += alpha[i] * alpha[i];
    }
  }
  const double mu = den > 0.0 ? (num - 1.0) / den : lo;
  Vector b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = std::max(0.0, v[i] - mu * alpha[i]);
  return b;
}

/// Largest budget violation |alpha_k'b_k - 1| or negative component over a
/// response sequence.
inline double BudgetResidual(const VectorSeq& responses, const VectorSeq& probes) {
  double r = 0.0;
  for (std::size_t k = 0; k < responses.size(); ++k) {
    r = std::max(r, std::abs(Dot(probes[k], responses[k]) - 1.0));
    for (double x : responses[k]) r = std::max(r, -x);
  }
  return r;
}

}  // namespace metacog

#endif  // METACOG_PROJECTION_HPP_
