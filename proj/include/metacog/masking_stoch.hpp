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

#ifndef METACOG_MASKING_STOCH_HPP_
#define METACOG_MASKING_STOCH_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "metacog/common.hpp"
#include "metacog/csv.hpp"
#include "metacog/masking_det.hpp"
#include "metacog/noisy_detector.hpp"
#include "metacog/projection.hpp"
#include "metacog/random.hpp"
#include "metacog/utility.hpp"

namespace metacog {

struct SpsaConfig {
  double lambda = 1.0;  // weight on the adversary's confusion
  double omega = 0.0;   // perturbation size; 0 => 0.01 * mean_k |b*_k|
  double eta = 0.05;
  bool decaying_step = false;  // eta_i = eta / (i + 1)^0.602
  long iters = 10000;
  std::size_t reps = 100;        // R: noise replications per cost estimate
  std::size_t eval_reps = 1000;  // replications for the reported final P(H1)
  double alpha = 0.05;           // detector significance
  std::uint64_t seed = 0;
  // Minimize sum(u(b) - u(b*)) - lambda P instead of the utility-loss form.
  bool printed_sign = false;
  long trace_stride = 10;

  void Validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("spsa: lambda must be >= 0");
    if (!(omega >= 0.0)) throw std::invalid_argument("spsa: omega must be >= 0");
    if (!(eta > 0.0)) throw std::invalid_argument("spsa: eta must be > 0");
    if (iters < 1) throw std::invalid_argument("spsa: iters must be >= 1");
    if (reps < 1 || eval_reps < 1) throw std::invalid_argument("spsa: R must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("spsa: alpha must be in (0, 1)");
    if (trace_stride < 1) throw std::invalid_argument("spsa: trace_stride must be >= 1");
  }
};

struct SpsaRecord {
  long iter = 0;
  double cost = 0.0;
  double confusion = 0.0;
  double utility_loss = 0.0;
  double feasibility_residual = 0.0;
};

using SpsaTrace = std::vector<SpsaRecord>;

inline double UtilityLoss(const VectorSeq& responses, const VectorSeq& naive,
                          const UtilityModel& u) {
  double loss = 0.0;
  for (std::size_t k = 0; k < responses.size(); ++k) {
    loss += EvalUtility(u, naive[k]) - EvalUtilityClamped(u, responses[k]);
  }
  return loss;
}

struct CostEstimate {
  double cost = 0.0;
  double confusion = 0.0;
  double utility_loss = 0.0;
};

/// J^(b) = sum_k (u(b*_k) - u(b_k)) - lambda P^(H1 | probes, b, u), with P^
/// from R noisy replications drawn from `rng`.
inline CostEstimate EstimateCostDetailed(const VectorSeq& responses,
                                         const VectorSeq& probes,
                                         const UtilityModel& u,
                                         const VectorSeq& naive,
                                         const SpsaConfig& cfg,
                                         const EmpiricalCdfL& cdf, Rng& rng) {
  DetectorConfig det;
  det.alpha = cfg.alpha;
  CostEstimate e;
  e.utility_loss = UtilityLoss(responses, naive, u);
  e.confusion = cfg.lambda == 0.0
                    ? 0.0
                    : ConditionalType1Prob(probes, responses, u, naive, cdf, det, cfg.reps, rng);
  const double loss_term = cfg.printed_sign ? -e.utility_loss : e.utility_loss;
  e.cost = loss_term - cfg.lambda * e.confusion;
  return e;
}

inline double EstimateCost(const VectorSeq& responses, const VectorSeq& probes,
                           const UtilityModel& u, const VectorSeq& naive,
                           const SpsaConfig& cfg, const EmpiricalCdfL& cdf,
                           Rng& rng) {
  return EstimateCostDetailed(responses, probes, u, naive, cfg, cdf, rng).cost;
}

struct SpsaDirection {
  VectorSeq delta;     // +-1 entries
  VectorSeq gradient;  // Delta / (2 omega |Delta|_F^2) (J+ - J-)
  double cost_plus = 0.0;
  double cost_minus = 0.0;
};

/// Two-sided simultaneous-perturbation gradient estimate. `cost` is called
/// on b + omega Delta and b - omega Delta; it must itself use common random
/// numbers if it is stochastic.
template <typename CostFn>
SpsaDirection SpsaGradient(CostFn&& cost, const VectorSeq& responses,
                           double omega, Rng& rng) {
  if (!(omega > 0.0)) throw std::invalid_argument("spsa_gradient: omega must be > 0");
  SpsaDirection dir;
  dir.delta = responses;
  std::bernoulli_distribution coin(0.5);
  double frob2 = 0.0;
  for (auto& row : dir.delta) {
    for (double& x : row) {
      x = coin(rng) ? 1.0 : -1.0;
      frob2 += 1.0;
    }
  }
  VectorSeq plus = responses, minus = responses;
  for (std::size_t k = 0; k < responses.size(); ++k) {
    for (std::size_t i = 0; i < responses[k].size(); ++i) {
      plus[k][i] += omega * dir.delta[k][i];
      minus[k][i] -= omega * dir.delta[k][i];
    }
  }
  dir.cost_plus = cost(plus);
  dir.cost_minus = cost(minus);
  const double scale = (dir.cost_plus - dir.cost_minus) / (2.0 * omega * frob2);
  dir.gradient = dir.delta;
  for (auto& row : dir.gradient) {
    for (double& x : row) x *= scale;
  }
  return dir;
}

struct StochasticMaskingResult {
  MaskingResult result;
  double confusion = 0.0;  // final P(H1), estimated with eval_reps
  SpsaTrace trace;
};

inline double DefaultOmega(const VectorSeq& naive) {
  double s = 0.0;
  for (const auto& b : naive) s += std::sqrt(SquaredNorm(b));
  return 0.01 * s / static_cast<double>(naive.size());
}

/// SPSA search trading utility loss against the adversary detector's
/// conditional Type-I error. Starts at the naive responses, every iterate
/// is projected back onto the budget faces.
inline StochasticMaskingResult MaskStochastic(const VectorSeq& probes,
                                              const UtilityModel& u,
                                              const SpsaConfig& cfg,
                                              const EmpiricalCdfL& cdf) {
  cfg.Validate();
  if (probes.empty()) throw std::invalid_argument("mask_stoch: no probes");
  const VectorSeq naive = NaiveResponses(u, probes);
  const double omega = cfg.omega > 0.0 ? cfg.omega : DefaultOmega(naive);

  StochasticMaskingResult out;
  VectorSeq beta = naive;
  Rng delta_rng = MakeStream(cfg.seed, "spsa-delta");
  for (long i = 0; i < cfg.iters; ++i) {
    const std::uint64_t noise_seed =
        DeriveSeed(cfg.seed, "spsa-noise", static_cast<std::uint64_t>(i));
    // J is defined on the budget faces only; trial points are scored at
    // their projection.
    auto cost = [&](const VectorSeq& b) {
      VectorSeq feasible(b.size());
      for (std::size_t k = 0; k < b.size(); ++k) feasible[k] = ProjectBudget(b[k], probes[k]);
      Rng rng(noise_seed);
      return EstimateCost(feasible, probes, u, naive, cfg, cdf, rng);
    };
    if (i % cfg.trace_stride == 0) {
      Rng rng(noise_seed);
      const CostEstimate e = EstimateCostDetailed(beta, probes, u, naive, cfg, cdf, rng);
      out.trace.push_back({i, e.cost, e.confusion, e.utility_loss, BudgetResidual(beta, probes)});
    }
    const SpsaDirection dir = SpsaGradient(cost, beta, omega, delta_rng);
    const double eta = cfg.decaying_step
                           ? cfg.eta / std::pow(static_cast<double>(i) + 1.0, 0.602)
                           : cfg.eta;
    for (std::size_t k = 0; k < beta.size(); ++k) {
      Vector step = beta[k];
      for (std::size_t j = 0; j < step.size(); ++j) step[j] -= eta * dir.gradient[k][j];
      beta[k] = ProjectBudget(step, probes[k]);
    }
  }

  DetectorConfig det;
  det.alpha = cfg.alpha;
  Rng eval_rng = MakeStream(cfg.seed, "spsa-final");
  out.confusion = ConditionalType1Prob(probes, beta, u, naive, cdf, det, cfg.eval_reps, eval_rng);
  {
    Rng rng = MakeStream(cfg.seed, "spsa-final");
    const CostEstimate e = EstimateCostDetailed(beta, probes, u, naive, cfg, cdf, rng);
    out.trace.push_back({cfg.iters, e.cost, e.confusion, e.utility_loss, BudgetResidual(beta, probes)});
  }

  MaskingResult& r = out.result;
  r.utility_loss = UtilityLoss(beta, naive, u);
  r.perturbation = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) r.perturbation += SquaredDistance(beta[k], naive[k]);
  r.achieved_margin = beta.size() >= 2 ? PassMargin(beta, naive, u) : 0.0;
  r.feasible = BudgetResidual(beta, probes) <= 1e-8;
  r.masked = std::move(beta);
  return out;
}

inline CsvTable TraceToCsv(const SpsaTrace& trace) {
  CsvTable t;
  t.header = {"iter", "cost", "confusion", "utility_loss", "feasibility_residual"};
  for (const auto& r : trace) {
    t.rows.push_back({std::to_string(r.iter), FormatDouble(r.cost), FormatDouble(r.confusion),
                      FormatDouble(r.utility_loss), FormatDouble(r.feasibility_residual)});
  }
  return t;
}

}  // namespace metacog

#endif  // METACOG_MASKING_STOCH_HPP_
