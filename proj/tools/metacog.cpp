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

// metacog command-line driver.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "metacog/csv.hpp"
#include "metacog/dataset.hpp"
#include "metacog/harness.hpp"
#include "metacog/masking_det.hpp"
#include "metacog/masking_stoch.hpp"
#include "metacog/noisy_detector.hpp"
#include "metacog/radar_model.hpp"
#include "metacog/rp_core.hpp"

namespace {

using namespace metacog;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
};

// Shared by the single-dataset commands.
struct LocalOptions {
  std::string data;
  double tol = kDefaultTol;
  std::string method = "cyclic";
  double alpha = 0.05;
  double sigma2 = 0.2;
  std::size_t n_cdf = 100000;
  std::string cdf;
  std::string system;
  std::string utility = "sqrt_sum";
  std::optional<double> epsilon;
  std::optional<double> epsilon_frac;
  std::string masked_out;
  std::optional<double> lambda;
  std::optional<long> iters;
  std::string trace;
};

void Emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    WriteTextFile(out, text);
  }
}

std::ostream& Log(const GlobalOptions& g) {
  static std::ostringstream sink;
  if (g.verbose) return std::cerr;
  sink.str("");
  return sink;
}

ExperimentConfig LoadExperiment(const GlobalOptions& g, ExperimentId fallback) {
  ExperimentConfig c;
  if (!g.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadTextFile(g.config));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(g.config + ": " + e.what());
    }
    if (j.is_object() && g.seed) j["seed"] = *g.seed;
    c = ConfigFromJson(j);
  } else {
    c = fallback == ExperimentId::kExample1 ? Example1Defaults() : Example2Defaults();
    c.seed = g.seed.value_or(0);
  }
  return c;
}

std::string OutPath(const GlobalOptions& g, const ExperimentConfig& c) {
  return g.out.empty() ? c.output : g.out;
}

ProbeResponseDataset RequireData(const LocalOptions& o, ResponseDomain domain) {
  if (o.data.empty()) throw std::invalid_argument("--data <csv> is required");
  return LoadDatasetCsv(o.data, domain);
}

PhiOptions MakePhiOptions(const LocalOptions& o) {
  PhiOptions p;
  p.tol = o.tol;
  if (o.method == "cyclic") {
    p.method = FeasibilityMethod::kCyclicConsistency;
  } else if (o.method == "lp") {
    p.method = FeasibilityMethod::kLinearProgram;
  } else {
    throw std::invalid_argument("--method must be cyclic or lp");
  }
  return p;
}

EmpiricalCdfL ObtainCdf(const GlobalOptions& g, const LocalOptions& o, const VectorSeq& probes) {
  const NoiseModel noise = NoiseModel::Gaussian(o.sigma2);
  if (!o.cdf.empty()) {
    const std::string text = ReadTextFile(o.cdf);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "sample") {
      throw std::invalid_argument(o.cdf + ": expected header 'sample'");
    }
    Vector samples;
    while (std::getline(in, line)) {
      if (!line.empty()) samples.push_back(ParseDouble(line, o.cdf));
    }
    return EmpiricalCdfL(std::move(samples), probes, noise);
  }
  Rng rng = MakeStream(g.seed.value_or(0), "cdf");
  return BuildCdfL(probes, noise, o.n_cdf, rng);
}

Eigen::MatrixXd JsonMatrix(const nlohmann::json& j, const char* key) {
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) throw std::invalid_argument(std::string(key) + ": empty matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd a(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m) {
      throw std::invalid_argument(std::string(key) + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < m; ++c) a(i, c) = rows[i][c].get<double>();
  }
  return a;
}

RadarSystem LoadSystem(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadTextFile(path));
    RadarSystem s;
    if (j.contains("alpha")) {
      const auto a = j.at("alpha").get<Vector>();
      const auto b = j.at("beta").get<Vector>();
      if (j.contains("A") || j.contains("C")) {
        return BuildSystem(a, b, JsonMatrix(j, "A"), JsonMatrix(j, "C"));
      }
      return BuildSystem(a, b);
    }
    s.A = JsonMatrix(j, "A");
    s.C = JsonMatrix(j, "C");
    s.Q = JsonMatrix(j, "Q");
    s.R = JsonMatrix(j, "R");
    if (s.A.rows() != s.A.cols() || s.Q.rows() != s.A.rows() || s.Q.cols() != s.A.cols() ||
        s.C.cols() != s.A.rows() || s.R.rows() != s.C.rows() || s.R.cols() != s.C.rows()) {
      throw std::invalid_argument(path + ": inconsistent system dimensions");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

CsvTable MatrixCsv(const Eigen::MatrixXd& a) {
  CsvTable t;
  for (Eigen::Index c = 0; c < a.cols(); ++c) t.header.push_back("c" + std::to_string(c + 1));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(FormatDouble(a(r, c)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::string> MaskRow(double eps, UtilityFamily f, const MaskingResult& r) {
  return {FormatDouble(eps), std::string(FamilyName(f)), FormatDouble(r.perturbation),
          FormatDouble(r.utility_loss), FormatDouble(r.achieved_margin),
          r.feasible ? "1" : "0"};
}

std::vector<std::string> MaskHeader() {
  return {"epsilon", "utility_family", "perturbation_l2", "utility_loss", "achieved_margin",
          "feasible"};
}

void WriteMasked(const std::string& path, const VectorSeq& probes, const VectorSeq& masked) {
  if (path.empty()) return;
  WriteCsv(DatasetToCsv(ProbeResponseDataset(probes, masked)), path);
}

int RunGarp(const GlobalOptions& g, const LocalOptions& o) {
  const auto d = RequireData(o, ResponseDomain::kRaw);
  Emit(CheckGarp(d, o.tol) ? "consistent\n" : "violated\n", g.out);
  return 0;
}

int RunAfriat(const GlobalOptions& g, const LocalOptions& o) {
  const auto d = RequireData(o, ResponseDomain::kRaw);
  const auto cert = AfriatFeasible(d, o.tol);
  if (!cert) {
    Emit("infeasible\n", g.out);
    return 0;
  }
  CsvTable t;
  t.header = {"epoch", "u", "lambda"};
  for (std::size_t k = 0; k < d.size(); ++k) {
    t.rows.push_back({std::to_string(k), FormatDouble(cert->u_vals[k]),
                      FormatDouble(cert->lambda_vals[k])});
  }
  Log(g) << "slack " << FormatDouble(cert->slack) << "\n";
  Emit(t.ToString(), g.out);
  return 0;
}

int RunPhi(const GlobalOptions& g, const LocalOptions& o) {
  const auto d = RequireData(o, ResponseDomain::kRaw);
  Emit(FormatDouble(StatisticPhi(d, MakePhiOptions(o))) + "\n", g.out);
  return 0;
}

int RunCdf(const GlobalOptions& g, const LocalOptions& o) {
  const auto d = RequireData(o, ResponseDomain::kRaw);
  const EmpiricalCdfL cdf = ObtainCdf(g, o, d.probes());
  Log(g) << "N=" << cdf.size() << " q95=" << FormatDouble(cdf.Quantile(0.95)) << "\n";
  Emit(CdfToCsv(cdf).ToString(), g.out);
  return 0;
}

int RunDetect(const GlobalOptions& g, const LocalOptions& o) {
  const auto d = RequireData(o, ResponseDomain::kRaw);
  DetectorConfig cfg;
  cfg.alpha = o.alpha;
  cfg.n_cdf = o.n_cdf;
  cfg.Validate();
  const EmpiricalCdfL cdf = ObtainCdf(g, o, d.probes());
  const Verdict v = Detect(d, cdf, cfg);
  Log(g) << "phi*=" << FormatDouble(StatisticPhi(d)) << " threshold="
         << FormatDouble(cdf.Quantile(1.0 - cfg.alpha)) << "\n";
  Emit(std::string(VerdictName(v)) + "\n", g.out);
  return 0;
}

int RunAre(const GlobalOptions& g, const LocalOptions& o) {
  if (o.system.empty()) throw std::invalid_argument("--system <json> is required");
  const RadarSystem s = LoadSystem(o.system);
  const Eigen::MatrixXd sigma = SolveAre(s);
  Log(g) << "residual " << FormatDouble(AreResidual(s, sigma)) << "\n";
  Emit(MatrixCsv(sigma).ToString(), g.out);
  return 0;
}

int RunMaskDet(const GlobalOptions& g, const LocalOptions& o) {
  ExperimentConfig c = LoadExperiment(g, ExperimentId::kExample1);
  const VectorSeq probes = o.data.empty() ? DrawProbes(c) : RequireData(o, ResponseDomain::kRaw).probes();
  const UtilityFamily f = ParseFamily(o.utility);
  const UtilityModel u = UtilityModel::FromFamily(f);
  const double eps_max = EpsilonMax(probes, u);
  DetMaskConfig cfg = c.mask_det;
  cfg.seed = DeriveSeed(c.seed, "mask-det", 0);
  if (o.epsilon && o.epsilon_frac) throw std::invalid_argument("give --epsilon or --epsilon-frac, not both");
  cfg.epsilon = o.epsilon ? *o.epsilon : o.epsilon_frac.value_or(0.0) * eps_max;
  Log(g) << "eps_max=" << FormatDouble(eps_max) << "\n";
  const MaskingResult r = MaskDeterministic(probes, u, cfg);
  CsvTable t;
  t.header = MaskHeader();
  t.rows.push_back(MaskRow(cfg.epsilon, f, r));
  WriteMasked(o.masked_out, probes, r.masked);
  Emit(t.ToString(), g.out);
  return 0;
}

int RunMaskStoch(const GlobalOptions& g, const LocalOptions& o) {
  ExperimentConfig c = LoadExperiment(g, ExperimentId::kExample2);
  const VectorSeq probes = o.data.empty() ? DrawProbes(c) : RequireData(o, ResponseDomain::kRaw).probes();
  const UtilityFamily f = c.utilities.front();
  const UtilityModel u = UtilityModel::FromFamily(f);
  SpsaConfig cfg = c.spsa;
  cfg.lambda = o.lambda.value_or(c.lambdas.front());
  cfg.alpha = o.alpha;
  if (o.iters) cfg.iters = *o.iters;
  cfg.seed = DeriveSeed(c.seed, "spsa", 0);
  Rng rng = MakeStream(c.seed, "cdf");
  const EmpiricalCdfL cdf = BuildCdfL(probes, NoiseModel::Gaussian(c.noise_variance), c.n_cdf, rng);
  const StochasticMaskingResult r = MaskStochastic(probes, u, cfg, cdf);
  CsvTable t;
  t.header = MaskHeader();
  for (const char* col : {"lambda", "alpha", "seed"}) t.header.emplace_back(col);
  // No margin target here; the epsilon column carries the margin reached.
  auto row = MaskRow(r.result.achieved_margin, f, r.result);
  row.push_back(FormatDouble(cfg.lambda));
  row.push_back(FormatDouble(cfg.alpha));
  row.push_back(std::to_string(c.seed));
  t.rows.push_back(std::move(row));
  Log(g) << "type1_prob=" << FormatDouble(r.confusion) << "\n";
  if (!o.trace.empty()) WriteCsv(TraceToCsv(r.trace), o.trace);
  WriteMasked(o.masked_out, probes, r.result.masked);
  Emit(t.ToString(), g.out);
  return 0;
}

int RunExperiment(const GlobalOptions& g, ExperimentId id) {
  ExperimentConfig c = LoadExperiment(g, id);
  if (c.experiment != id) {
    throw std::invalid_argument("config describes " + ExperimentName(c.experiment) +
                                ", not " + ExperimentName(id));
  }
  ProgressFn log;
  if (g.verbose) log = [](const std::string& s) { std::cerr << s << "\n"; };
  const CsvTable t = id == ExperimentId::kExample1 ? RunExample1(c, log) : RunExample2(c, log);
  const std::string out = OutPath(g, c);
  if (out.empty()) {
    std::cout << t.ToString();
  } else {
    WriteResults(t, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metacog: revealed-preference detectors and masking"};
  app.require_subcommand(1);
  GlobalOptions g;
  LocalOptions o;
  std::uint64_t seed = 0;

  auto add_global = [&](CLI::App* sub) {
    sub->add_option("--config", g.config, "ExperimentConfig JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", g.out, "Output path (default stdout)");
    sub->add_flag("--verbose", g.verbose, "Progress on stderr");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Dataset CSV epoch,alpha_*,beta_*")->check(CLI::ExistingFile);
  };

  CLI::App* garp = app.add_subcommand("garp", "Cyclic-consistency (GARP) check");
  CLI::App* afriat = app.add_subcommand("afriat", "Solve the Afriat inequalities");
  CLI::App* phi = app.add_subcommand("phi", "Minimum relaxation phi*");
  CLI::App* detect = app.add_subcommand("detect", "Utility-maximizer test, prints H0 or H1");
  CLI::App* cdf = app.add_subcommand("cdf-l", "Monte-Carlo samples of L");
  CLI::App* are = app.add_subcommand("are", "Steady-state Riccati covariance");
  CLI::App* mdet = app.add_subcommand("mask-det", "Deterministic masking");
  CLI::App* msto = app.add_subcommand("mask-stoch", "SPSA masking against the detector");
  CLI::App* ex1 = app.add_subcommand("ex1", "Perturbation versus margin sweep");
  CLI::App* ex2 = app.add_subcommand("ex2", "Detector confusion versus lambda and alpha");
  for (CLI::App* sub : {garp, afriat, phi, detect, cdf, are, mdet, msto, ex1, ex2}) add_global(sub);
  for (CLI::App* sub : {garp, afriat, phi, detect, cdf, mdet, msto}) add_data(sub);
  for (CLI::App* sub : {garp, afriat, phi}) sub->add_option("--tol", o.tol, "Inequality tolerance");
  phi->add_option("--method", o.method, "cyclic or lp");
  for (CLI::App* sub : {detect, cdf}) {
    sub->add_option("--sigma2", o.sigma2, "Noise variance");
    sub->add_option("--n-cdf", o.n_cdf, "Monte-Carlo size");
  }
  detect->add_option("--alpha", o.alpha, "Significance level");
  detect->add_option("--cdf", o.cdf, "Reuse samples from a cdf-l CSV")->check(CLI::ExistingFile);
  are->add_option("--system", o.system, "System JSON")->check(CLI::ExistingFile);
  mdet->add_option("--utility", o.utility, "sqrt_sum or quad_sum");
  mdet->add_option("--epsilon", o.epsilon, "Target margin");
  mdet->add_option("--epsilon-frac", o.epsilon_frac, "Target margin as a fraction of eps_max");
  for (CLI::App* sub : {mdet, msto}) sub->add_option("--masked-out", o.masked_out, "Masked dataset CSV");
  msto->add_option("--lambda", o.lambda, "Confusion weight");
  msto->add_option("--alpha", o.alpha, "Significance level");
  msto->add_option("--iters", o.iters, "SPSA iterations");
  msto->add_option("--trace", o.trace, "Trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) g.seed = seed;
  }

  try {
    if (garp->parsed()) return RunGarp(g, o);
    if (afriat->parsed()) return RunAfriat(g, o);
    if (phi->parsed()) return RunPhi(g, o);
    if (detect->parsed()) return RunDetect(g, o);
    if (cdf->parsed()) return RunCdf(g, o);
    if (are->parsed()) return RunAre(g, o);
    if (mdet->parsed()) return RunMaskDet(g, o);
    if (msto->parsed()) return RunMaskStoch(g, o);
    if (ex1->parsed()) return RunExperiment(g, ExperimentId::kExample1);
    if (ex2->parsed()) return RunExperiment(g, ExperimentId::kExample2);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    // I/O problems: unreadable input or unwritable output.
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
