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

#ifndef METACOG_NOISY_DETECTOR_HPP_
#define METACOG_NOISY_DETECTOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "metacog/common.hpp"
#include "metacog/csv.hpp"
#include "metacog/dataset.hpp"
#include "metacog/random.hpp"
#include "metacog/rp_core.hpp"
#include "metacog/utility.hpp"

namespace metacog {

enum class NoiseKind { kGaussianDiag, kDegenerate };

/// Additive measurement noise w_k, iid over epochs and components.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kDegenerate;
  double sigma2 = 0.0;

  static NoiseModel Gaussian(double variance) {
    if (!(variance >= 0.0)) {
      throw std::invalid_argument("noise variance must be >= 0");
    }
    return {NoiseKind::kGaussianDiag, variance};
  }
  static NoiseModel Degenerate() { return {NoiseKind::kDegenerate, 0.0}; }

  bool is_zero() const { return kind == NoiseKind::kDegenerate || sigma2 == 0.0; }

  void Draw(Rng& rng, std::span<double> out) const {
    if (is_zero()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
    for (double& x : out) x = normal(rng);
  }
};

inline ProbeResponseDataset SampleNoisyDataset(const ProbeResponseDataset& d,
                                               const NoiseModel& nm, Rng& rng) {
  VectorSeq noisy = d.responses();
  Vector w(d.dim());
  for (auto& b : noisy) {
    nm.Draw(rng, w);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += w[i];
  }
  return ProbeResponseDataset(d.probes(), std::move(noisy), ResponseDomain::kRaw);
}

/// Monte-Carlo distribution of L = max_{i,j} alpha_i'(w_i - w_j) over all
/// ordered pairs, the i = j pair included (so L >= 0).
class EmpiricalCdfL {
 public:
  EmpiricalCdfL(Vector samples, VectorSeq probes, NoiseModel noise)
      : samples_(std::move(samples)), probes_(std::move(probes)), noise_(noise) {
    if (samples_.empty()) throw std::invalid_argument("cdf_L: no samples");
    std::sort(samples_.begin(), samples_.end());
  }

  std::size_t size() const { return samples_.size(); }
  const Vector& samples() const { return samples_; }
  const VectorSeq& probes() const { return probes_; }
  const NoiseModel& noise() const { return noise_; }

  // Right-continuous step function #{samples <= x} / N.
  double Cdf(double x) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) /
           static_cast<double>(samples_.size());
  }

  // ceil(pN)-th order statistic, p in (0, 1].
  double Quantile(double p) const {
    if (!(p > 0.0 && p <= 1.0)) {
      throw std::invalid_argument("cdf_L quantile: p must be in (0, 1]");
    }
    const double n = static_cast<double>(samples_.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, samples_.size());
    return samples_[rank - 1];
  }

 private:
  Vector samples_;
  VectorSeq probes_;
  NoiseModel noise_;
};

namespace internal {

// L for one noise sequence (row-major K x m):
// max_i (alpha_i'w_i - min_j alpha_i'w_j).
inline double StatisticL(const VectorSeq& probes, std::span<const double> w) {
  const std::size_t k = probes.size();
  const std::size_t m = probes.front().size();
  double best = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double* a = probes[i].data();
    double own = 0.0;
    for (std::size_t c = 0; c < m; ++c) own += a[c] * w[i * m + c];
    double lowest = own;
    for (std::size_t j = 0; j < k; ++j) {
      double x = 0.0;
      for (std::size_t c = 0; c < m; ++c) x += a[c] * w[j * m + c];
      lowest = std::min(lowest, x);
    }
    best = std::max(best, own - lowest);
  }
  return best;
}

}  // namespace internal

inline EmpiricalCdfL BuildCdfL(const VectorSeq& probes, const NoiseModel& nm,
                               std::size_t n, Rng& rng) {
  if (probes.empty()) throw std::invalid_argument("build_cdf_L: no probes");
  if (n == 0) throw std::invalid_argument("build_cdf_L: N must be >= 1");
  const std::size_t m = probes.front().size();
  Vector w(probes.size() * m);
  Vector samples(n);
  for (std::size_t r = 0; r < n; ++r) {
    nm.Draw(rng, w);
    samples[r] = internal::StatisticL(probes, w);
  }
  return EmpiricalCdfL(std::move(samples), probes, nm);
}

inline CsvTable CdfToCsv(const EmpiricalCdfL& cdf) {
  CsvTable t;
  t.header = {"sample"};
  t.rows.reserve(cdf.size());
  for (double x : cdf.samples()) t.rows.push_back({FormatDouble(x)});
  return t;
}

enum class FeasibilityMethod {
  kCyclicConsistency,  // combinatorial Afriat check, O(K^3)
  kLinearProgram,      // simplex on the relaxed Afriat system
};

struct PhiOptions {
  double tol = kDefaultTol;  // inequality slack
  double tol_phi = 1e-6;     // bisection width
  FeasibilityMethod method = FeasibilityMethod::kCyclicConsistency;
};

/// Is u_s - u_t - lambda_t alpha_t'(b_s - b_t) <= lambda_t eps feasible?
inline bool RelaxedAfriatFeasible(const ProbeResponseDataset& d, double eps,
                                  const PhiOptions& opt = {}) {
  const CostMatrix c = AfriatCosts(d, eps);
  if (opt.method == FeasibilityMethod::kLinearProgram) {
    return SolveAfriatSystem(c, opt.tol).has_value();
  }
  return CyclicallyConsistent(c, opt.tol);
}

/// phi*(D): the smallest relaxation eps making the dataset Afriat-feasible.
/// Feasibility is monotone in eps, so a bisection over [0, eps_hi] with
/// eps_hi = max |alpha_t'(b_s - b_t)| + 1 brackets it. Returns the feasible
/// end of the final bracket.
inline double StatisticPhi(const ProbeResponseDataset& dhat,
                           const PhiOptions& opt = {}) {
  if (RelaxedAfriatFeasible(dhat, 0.0, opt)) return 0.0;
  double hi = 0.0;
  for (std::size_t t = 0; t < dhat.size(); ++t) {
    for (std::size_t s = 0; s < dhat.size(); ++s) {
      hi = std::max(hi, std::abs(dhat.CrossCost(t, s)));
    }
  }
  hi += 1.0;
  if (!RelaxedAfriatFeasible(dhat, hi, opt)) {
    throw NumericalError("statistic_phi: upper bracket infeasible", hi);
  }
  double lo = 0.0;
  while (hi - lo > opt.tol_phi) {
    const double mid = 0.5 * (lo + hi);
    (RelaxedAfriatFeasible(dhat, mid, opt) ? hi : lo) = mid;
  }
  return hi;
}

/// Multipliers pinned by the true utility: lambda_t = alpha_t'grad u(b*_t) /
/// |alpha_t|^2, the least-squares solution of grad u(b*_t) = lambda_t alpha_t.
inline Vector UtilityMultipliers(const VectorSeq& probes, const UtilityModel& u,
                                 const VectorSeq& naive) {
  if (probes.size() != naive.size()) {
    throw std::invalid_argument("multipliers: probe/naive length mismatch");
  }
  Vector lambda(probes.size());
  for (std::size_t t = 0; t < probes.size(); ++t) {
    const Vector g = GradUtility(u, naive[t]);
    lambda[t] = Dot(probes[t], g) / SquaredNorm(probes[t]);
    if (!(lambda[t] > 0.0)) {
      throw std::invalid_argument("statistic_phi_u: utility gives lambda_" +
                                  std::to_string(t) + " <= 0");
    }
  }
  return lambda;
}

namespace internal {

// max_{s != t} (u_s - u_t) / lambda_t - alpha_t'(b_s - b_t), with the
// utilities already evaluated. `b` is row-major K x m.
inline double PinnedStatistic(const VectorSeq& probes, std::span<const double> b,
                              const Vector& util, const Vector& lambda) {
  const std::size_t k = probes.size();
  const std::size_t m = probes.front().size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < k; ++t) {
    const double* a = probes[t].data();
    const double* bt = b.data() + t * m;
    double own = 0.0;
    for (std::size_t i = 0; i < m; ++i) own += a[i] * bt[i];
    const double inv = 1.0 / lambda[t];
    const double base = own - util[t] * inv;
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      const double* bs = b.data() + s * m;
      double cross = 0.0;
      for (std::size_t i = 0; i < m; ++i) cross += a[i] * bs[i];
      best = std::max(best, util[s] * inv - cross + base);
    }
  }
  return best;
}

inline Vector Flatten(const VectorSeq& rows) {
  Vector flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

}  // namespace internal

/// phi*_u: the sufficient statistic with {u_t, lambda_t} fixed by the true
/// utility. Measurements outside the orthant are scored by u at their clamp.
inline double StatisticPhiU(const ProbeResponseDataset& dhat,
                            const UtilityModel& u, const VectorSeq& naive) {
  const Vector lambda = UtilityMultipliers(dhat.probes(), u, naive);
  Vector util(dhat.size());
  for (std::size_t t = 0; t < dhat.size(); ++t) {
    util[t] = EvalUtilityClamped(u, dhat.response(t));
  }
  return internal::PinnedStatistic(dhat.probes(), internal::Flatten(dhat.responses()),
                                   util, lambda);
}

struct DetectorConfig {
  double alpha = 0.05;
  std::size_t n_cdf = 100000;
  double tol_phi = 1e-6;

  void Validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("detector: alpha must be in (0, 1)");
    }
    if (n_cdf < 1000) throw std::invalid_argument("detector: N_cdf must be >= 1000");
  }
};

enum class Verdict { kH0, kH1 };

inline std::string_view VerdictName(Verdict v) { return v == Verdict::kH0 ? "H0" : "H1"; }

/// H0 (utility maximizer) iff F_L(phi*) <= 1 - alpha.
inline Verdict Detect(const ProbeResponseDataset& dhat, const EmpiricalCdfL& cdf,
                      const DetectorConfig& cfg) {
  PhiOptions opt;
  opt.tol_phi = cfg.tol_phi;
  const double phi = StatisticPhi(dhat, opt);
  return cdf.Cdf(phi) <= 1.0 - cfg.alpha ? Verdict::kH0 : Verdict::kH1;
}

/// Empirical P(H1 | probes, responses, u): the share of R noisy copies of
/// `responses` whose pinned statistic reaches the 1 - alpha level of F_L.
inline double ConditionalType1Prob(const VectorSeq& probes,
                                   const VectorSeq& responses,
                                   const UtilityModel& u, const VectorSeq& naive,
                                   const EmpiricalCdfL& cdf,
                                   const DetectorConfig& cfg, std::size_t reps,
                                   Rng& rng) {
  if (reps == 0) throw std::invalid_argument("conditional_type1_prob: R must be >= 1");
  const Vector lambda = UtilityMultipliers(probes, u, naive);
  const std::size_t k = probes.size();
  const std::size_t m = probes.front().size();
  const Vector base = internal::Flatten(responses);
  if (base.size() != k * m) {
    throw std::invalid_argument("conditional_type1_prob: response shape mismatch");
  }
  Vector noisy(k * m);
  Vector util(k);
  const double level = 1.0 - cfg.alpha;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    cdf.noise().Draw(rng, noisy);
    for (std::size_t j = 0; j < noisy.size(); ++j) noisy[j] += base[j];
    for (std::size_t t = 0; t < k; ++t) {
      util[t] = EvalUtilityClamped(u, std::span<const double>(noisy).subspan(t * m, m));
    }
    const double phi = internal::PinnedStatistic(probes, noisy, util, lambda);
    if (cdf.Cdf(phi) >= level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reps);
}

}  // namespace metacog

#endif  // METACOG_NOISY_DETECTOR_HPP_
