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

#ifndef METACOG_COMMON_HPP_
#define METACOG_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace metacog {

using Vector = std::vector<double>;
using VectorSeq = std::vector<Vector>;

// Slack used on every Afriat/GARP inequality.
inline constexpr double kDefaultTol = 1e-9;

// Raised when an iterative solver fails to reach its tolerance. Carries the
// last observed residual so callers can report how close it got.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("Dot: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double SquaredNorm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// a' (b - c)
inline double DotDiff(std::span<const double> a, std::span<const double> b,
                      std::span<const double> c) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * (b[i] - c[i]);
  return s;
}

}  // namespace metacog

#endif  // METACOG_COMMON_HPP_
