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

#ifndef METACOG_HARNESS_HPP_
#define METACOG_HARNESS_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "metacog/common.hpp"
#include "metacog/csv.hpp"
#include "metacog/masking_det.hpp"
#include "metacog/masking_stoch.hpp"
#include "metacog/noisy_detector.hpp"
#include "metacog/random.hpp"
#include "metacog/utility.hpp"

namespace metacog {

enum class ExperimentId { kExample1, kExample2 };

inline std::string ExperimentName(ExperimentId id) {
  return id == ExperimentId::kExample1 ? "ex1" : "ex2";
}

inline ExperimentId ParseExperimentId(const std::string& s) {
  if (s == "ex1") return ExperimentId::kExample1;
  if (s == "ex2") return ExperimentId::kExample2;
  throw std::invalid_argument("config: unknown experiment '" + s + "'");
}

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::kExample1;
  std::size_t k = 50;
  std::size_t m = 2;
  double probe_low = 0.2;
  double probe_high = 2.5;
  std::vector<UtilityFamily> utilities = {UtilityFamily::kSqrtSum, UtilityFamily::kQuadSum};
  // Example 1 grid, as fractions of eps_max.
  std::vector<double> epsilon_fractions;
  DetMaskConfig mask_det;
  // Example 2 grid.
  std::vector<double> lambdas;
  std::vector<double> alphas;
  double noise_variance = 0.2;
  std::size_t n_cdf = 100000;
  SpsaConfig spsa;
  std::uint64_t seed = 0;
  std::string output;

  bool operator==(const ExperimentConfig& o) const {
    return experiment == o.experiment && k == o.k && m == o.m &&
           probe_low == o.probe_low && probe_high == o.probe_high &&
           utilities == o.utilities && epsilon_fractions == o.epsilon_fractions &&
           mask_det.starts == o.mask_det.starts &&
           mask_det.penalty_start == o.mask_det.penalty_start &&
           mask_det.penalty_end == o.mask_det.penalty_end &&
           mask_det.inner_iters == o.mask_det.inner_iters &&
           mask_det.tol == o.mask_det.tol && mask_det.max_pairs == o.mask_det.max_pairs &&
           lambdas == o.lambdas && alphas == o.alphas &&
           noise_variance == o.noise_variance && n_cdf == o.n_cdf &&
           spsa.omega == o.spsa.omega && spsa.eta == o.spsa.eta &&
           spsa.decaying_step == o.spsa.decaying_step && spsa.iters == o.spsa.iters &&
           spsa.reps == o.spsa.reps && spsa.eval_reps == o.spsa.eval_reps &&
           spsa.printed_sign == o.spsa.printed_sign &&
           spsa.trace_stride == o.spsa.trace_stride && seed == o.seed &&
           output == o.output;
  }

  void Validate() const {
    if (k < 2) throw std::invalid_argument("config: K must be >= 2");
    if (m < 1) throw std::invalid_argument("config: m must be >= 1");
    if (!(probe_low > 0.0) || !(probe_low < probe_high) || !std::isfinite(probe_high)) {
      throw std::invalid_argument("config: need 0 < probe_low < probe_high");
    }
    if (utilities.empty()) throw std::invalid_argument("config: utilities is empty");
    for (auto f : utilities) {
      if (f == UtilityFamily::kPiecewiseAffine) {
        throw std::invalid_argument("config: experiments need a closed-form utility");
      }
    }
    if (experiment == ExperimentId::kExample1) {
      if (epsilon_fractions.empty()) throw std::invalid_argument("config: epsilon grid is empty");
      for (double f : epsilon_fractions) {
        if (!std::isfinite(f)) throw std::invalid_argument("config: epsilon grid not finite");
      }
      mask_det.Validate();
    } else {
      if (lambdas.empty() || alphas.empty()) {
        throw std::invalid_argument("config: lambda and alpha grids must be nonempty");
      }
      if (!(noise_variance > 0.0)) throw std::invalid_argument("config: noise_variance must be > 0");
      for (double a : alphas) {
        DetectorConfig d{a, n_cdf};
        d.Validate();
      }
      for (double l : lambdas) {
        SpsaConfig s = spsa;
        s.lambda = l;
        s.Validate();
      }
    }
  }
};

/// Desk-scale defaults for the deterministic masking sweep.
inline ExperimentConfig Example1Defaults() {
  ExperimentConfig c;
  c.experiment = ExperimentId::kExample1;
  c.k = 50;
  c.m = 2;
  c.probe_low = 0.2;
  c.probe_high = 2.5;
  c.utilities = {UtilityFamily::kSqrtSum, UtilityFamily::kQuadSum};
  for (int j = 0; j <= 10; ++j) c.epsilon_fractions.push_back(j / 10.0);
  return c;
}

/// Desk-scale defaults for the stochastic masking sweep.
inline ExperimentConfig Example2Defaults() {
  ExperimentConfig c;
  c.experiment = ExperimentId::kExample2;
  c.k = 20;
  c.m = 3;
  c.probe_low = 1.0;
  c.probe_high = 4.0;
  c.utilities = {UtilityFamily::kSqrtSum};
  c.lambdas = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5};
  c.alphas = {0.05, 0.1, 0.2};
  c.noise_variance = 0.2;
  c.n_cdf = 100000;
  return c;
}

inline nlohmann::json ConfigToJson(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = ExperimentName(c.experiment);
  j["K"] = c.k;
  j["m"] = c.m;
  j["probe_low"] = c.probe_low;
  j["probe_high"] = c.probe_high;
  std::vector<std::string> names;
  for (auto f : c.utilities) names.emplace_back(FamilyName(f));
  j["utilities"] = names;
  j["epsilon_fractions"] = c.epsilon_fractions;
  j["mask_det"] = {{"starts", c.mask_det.starts},
                   {"penalty_start", c.mask_det.penalty_start},
                   {"penalty_end", c.mask_det.penalty_end},
                   {"inner_iters", c.mask_det.inner_iters},
                   {"tol", c.mask_det.tol},
                   {"max_pairs", c.mask_det.max_pairs}};
  j["lambdas"] = c.lambdas;
  j["alphas"] = c.alphas;
  j["noise_variance"] = c.noise_variance;
  j["n_cdf"] = c.n_cdf;
  j["spsa"] = {{"omega", c.spsa.omega},
               {"eta", c.spsa.eta},
               {"decaying_step", c.spsa.decaying_step},
               {"iters", c.spsa.iters},
               {"reps", c.spsa.reps},
               {"eval_reps", c.spsa.eval_reps},
               {"printed_sign", c.spsa.printed_sign},
               {"trace_stride", c.spsa.trace_stride}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

namespace internal {

template <typename T>
void ReadIfPresent(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void CheckKeys(const nlohmann::json& j, const std::vector<std::string>& known,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == it.key();
    if (!ok) throw std::invalid_argument("config: unknown key '" + where + it.key() + "'");
  }
}

}  // namespace internal

/// Builds a config from JSON. Fields absent from the document take the
/// defaults of the named experiment; "experiment" and "seed" are required.
inline ExperimentConfig ConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  if (!j.contains("experiment")) throw std::invalid_argument("config: missing 'experiment'");
  if (!j.contains("seed")) throw std::invalid_argument("config: missing 'seed'");
  internal::CheckKeys(j, {"experiment", "K", "m", "probe_low", "probe_high", "utilities",
                          "epsilon_fractions", "mask_det", "lambdas", "alphas",
                          "noise_variance", "n_cdf", "spsa", "seed", "output"},
                      "");
  try {
    const ExperimentId id = ParseExperimentId(j.at("experiment").get<std::string>());
    ExperimentConfig c = id == ExperimentId::kExample1 ? Example1Defaults() : Example2Defaults();
    internal::ReadIfPresent(j, "K", c.k);
    internal::ReadIfPresent(j, "m", c.m);
    internal::ReadIfPresent(j, "probe_low", c.probe_low);
    internal::ReadIfPresent(j, "probe_high", c.probe_high);
    if (j.contains("utilities")) {
      c.utilities.clear();
      for (const auto& n : j.at("utilities")) c.utilities.push_back(ParseFamily(n.get<std::string>()));
    }
    internal::ReadIfPresent(j, "epsilon_fractions", c.epsilon_fractions);
    if (j.contains("mask_det")) {
      const auto& d = j.at("mask_det");
      internal::CheckKeys(d, {"starts", "penalty_start", "penalty_end", "inner_iters", "tol",
                              "max_pairs"},
                          "mask_det.");
      internal::ReadIfPresent(d, "starts", c.mask_det.starts);
      internal::ReadIfPresent(d, "penalty_start", c.mask_det.penalty_start);
      internal::ReadIfPresent(d, "penalty_end", c.mask_det.penalty_end);
      internal::ReadIfPresent(d, "inner_iters", c.mask_det.inner_iters);
      internal::ReadIfPresent(d, "tol", c.mask_det.tol);
      internal::ReadIfPresent(d, "max_pairs", c.mask_det.max_pairs);
    }
    internal::ReadIfPresent(j, "lambdas", c.lambdas);
    internal::ReadIfPresent(j, "alphas", c.alphas);
    internal::ReadIfPresent(j, "noise_variance", c.noise_variance);
    internal::ReadIfPresent(j, "n_cdf", c.n_cdf);
    if (j.contains("spsa")) {
      const auto& s = j.at("spsa");
      internal::CheckKeys(s, {"omega", "eta", "decaying_step", "iters", "reps", "eval_reps",
                              "printed_sign", "trace_stride"},
                          "spsa.");
      internal::ReadIfPresent(s, "omega", c.spsa.omega);
      internal::ReadIfPresent(s, "eta", c.spsa.eta);
      internal::ReadIfPresent(s, "decaying_step", c.spsa.decaying_step);
      internal::ReadIfPresent(s, "iters", c.spsa.iters);
      internal::ReadIfPresent(s, "reps", c.spsa.reps);
      internal::ReadIfPresent(s, "eval_reps", c.spsa.eval_reps);
      internal::ReadIfPresent(s, "printed_sign", c.spsa.printed_sign);
      internal::ReadIfPresent(s, "trace_stride", c.spsa.trace_stride);
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    internal::ReadIfPresent(j, "output", c.output);
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig ParseConfig(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return ConfigFromJson(j);
}

inline std::string SerializeConfig(const ExperimentConfig& c) {
  return ConfigToJson(c).dump(2) + "\n";
}

/// Probes drawn i.i.d. uniform on [low, high) from the "probes" stream.
inline VectorSeq DrawProbes(const ExperimentConfig& c) {
  Rng rng = MakeStream(c.seed, "probes");
  std::uniform_real_distribution<double> dist(c.probe_low, c.probe_high);
  VectorSeq probes(c.k, Vector(c.m));
  for (auto& a : probes) {
    for (auto& x : a) x = dist(rng);
  }
  return probes;
}

using ProgressFn = std::function<void(const std::string&)>;

inline CsvTable RunExample1(const ExperimentConfig& c, const ProgressFn& log = {}) {
  if (c.experiment != ExperimentId::kExample1) {
    throw std::invalid_argument("run_example1: config is not ex1");
  }
  c.Validate();
  const VectorSeq probes = DrawProbes(c);
  CsvTable t;
  t.header = {"utility", "epsilon", "epsilon_over_epsmax", "perturbation_l2",
              "utility_loss", "feasible", "seed"};
  std::uint64_t cell = 0;
  for (UtilityFamily f : c.utilities) {
    const UtilityModel u = UtilityModel::FromFamily(f);
    const double eps_max = EpsilonMax(probes, u);
    for (double frac : c.epsilon_fractions) {
      DetMaskConfig cfg = c.mask_det;
      cfg.epsilon = frac * eps_max;
      cfg.seed = DeriveSeed(c.seed, "mask-det", cell++);
      const MaskingResult r = MaskDeterministic(probes, u, cfg);
      t.rows.push_back({std::string(FamilyName(f)), FormatDouble(cfg.epsilon),
                        FormatDouble(frac), FormatDouble(r.perturbation),
                        FormatDouble(r.utility_loss), r.feasible ? "1" : "0",
                        std::to_string(c.seed)});
      if (log) {
        log(std::string(FamilyName(f)) + " eps/eps_max=" + FormatDouble(frac) +
            " perturbation=" + FormatDouble(r.perturbation));
      }
    }
  }
  return t;
}

inline CsvTable RunExample2(const ExperimentConfig& c, const ProgressFn& log = {}) {
  if (c.experiment != ExperimentId::kExample2) {
    throw std::invalid_argument("run_example2: config is not ex2");
  }
  c.Validate();
  const VectorSeq probes = DrawProbes(c);
  const UtilityModel u = UtilityModel::FromFamily(c.utilities.front());
  Rng cdf_rng = MakeStream(c.seed, "cdf");
  const EmpiricalCdfL cdf =
      BuildCdfL(probes, NoiseModel::Gaussian(c.noise_variance), c.n_cdf, cdf_rng);
  CsvTable t;
  t.header = {"lambda", "alpha", "type1_prob", "utility_loss", "iters", "seed"};
  std::uint64_t cell = 0;
  for (double lambda : c.lambdas) {
    for (double alpha : c.alphas) {
      SpsaConfig cfg = c.spsa;
      cfg.lambda = lambda;
      cfg.alpha = alpha;
      cfg.seed = DeriveSeed(c.seed, "spsa", cell++);
      const StochasticMaskingResult r = MaskStochastic(probes, u, cfg, cdf);
      t.rows.push_back({FormatDouble(lambda), FormatDouble(alpha), FormatDouble(r.confusion),
                        FormatDouble(r.result.utility_loss), std::to_string(cfg.iters),
                        std::to_string(c.seed)});
      if (log) {
        log("lambda=" + FormatDouble(lambda) + " alpha=" + FormatDouble(alpha) +
            " type1_prob=" + FormatDouble(r.confusion) +
            " utility_loss=" + FormatDouble(r.result.utility_loss));
      }
    }
  }
  return t;
}

inline void WriteResults(const CsvTable& table, const std::filesystem::path& path) {
  WriteCsv(table, path);
}

}  // namespace metacog

#endif  // METACOG_HARNESS_HPP_
