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

#include <filesystem>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "metacog/csv.hpp"
#include "metacog/dataset.hpp"
#include "metacog/harness.hpp"
#include "metacog/random.hpp"

namespace metacog {
namespace {

namespace fs = std::filesystem;

fs::path TempDir() {
  const fs::path p = fs::temp_directory_path() / "metacog_harness_test";
  fs::create_directories(p);
  return p;
}

TEST(RandomTest, StreamsAreLabelledAndIndexed) {
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_NE(DeriveSeed(1, "a", 0), DeriveSeed(1, "a", 1));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(2, "a"));
  EXPECT_EQ(DeriveSeed(5, "x", 3), DeriveSeed(5, "x", 3));
  Rng a = MakeStream(3, "s"), b = MakeStream(3, "s");
  EXPECT_EQ(a(), b());
}

TEST(CsvTest, DoublesRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456.789}) {
    EXPECT_EQ(ParseDouble(FormatDouble(x), "test"), x);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_THROW(ParseDouble("abc", "ctx"), std::invalid_argument);
}

TEST(CsvTest, DatasetRoundTrip) {
  const ProbeResponseDataset d({{1.0, 0.5}, {0.25, 0.5}}, {{1.0, 0.0}, {0.0, 2.0}});
  const CsvTable t = DatasetToCsv(d);
  EXPECT_EQ(t.header, (std::vector<std::string>{"epoch", "alpha_1", "alpha_2", "beta_1", "beta_2"}));
  const auto back = ParseDatasetCsv(t.ToString());
  EXPECT_EQ(back.probes(), d.probes());
  EXPECT_EQ(back.responses(), d.responses());
  EXPECT_THROW(ParseDatasetCsv("epoch,a,b\n"), std::invalid_argument);
  EXPECT_THROW(ParseDatasetCsv("epoch,alpha_1,beta_1\n0,1\n"), std::invalid_argument);
}

TEST(ConfigTest, RoundTripBothExperiments) {
  for (ExperimentConfig c : {Example1Defaults(), Example2Defaults()}) {
    c.seed = 12345678901234ULL;
    c.output = "out.csv";
    c.spsa.eta = 0.1 / 3.0;
    EXPECT_EQ(ParseConfig(SerializeConfig(c)), c);
  }
}

TEST(ConfigTest, PartialDocumentTakesDefaults) {
  const ExperimentConfig c = ParseConfig(R"({"experiment": "ex2", "seed": 3, "spsa": {"iters": 10}})");
  ExperimentConfig expected = Example2Defaults();
  expected.seed = 3;
  expected.spsa.iters = 10;
  EXPECT_EQ(c, expected);
}

TEST(ConfigTest, RejectsInvalidDocuments) {
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex1"})"), std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"seed": 1})"), std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex3", "seed": 1})"), std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex1", "seed": 1, "epsilon_fractions": []})"),
               std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex2", "seed": 1, "lambdas": []})"),
               std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex1", "seed": 1, "probe_low": 3})"),
               std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex1", "seed": 1, "typo": 3})"),
               std::invalid_argument);
  EXPECT_THROW(ParseConfig(R"({"experiment": "ex1", "seed": "x"})"), std::invalid_argument);
  EXPECT_THROW(ParseConfig("{not json"), std::invalid_argument);
}

TEST(WriteResultsTest, EmptyTableIsHeaderOnly) {
  CsvTable t;
  t.header = {"lambda", "alpha"};
  const fs::path p = TempDir() / "empty.csv";
  WriteResults(t, p);
  EXPECT_EQ(ReadTextFile(p), "lambda,alpha\n");
}

TEST(WriteResultsTest, MissingDirectoryIsNamed) {
  CsvTable t;
  t.header = {"x"};
  const fs::path dir = TempDir() / "does_not_exist";
  try {
    WriteResults(t, dir / "out.csv");
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(dir.string()), std::string::npos);
  }
}

ExperimentConfig SmallExample1() {
  ExperimentConfig c = Example1Defaults();
  c.k = 8;
  c.epsilon_fractions = {0.0, 0.5, 1.0};
  c.seed = 11;
  return c;
}

TEST(Example1Test, SmallRunShapeAndDeterminism) {
  const ExperimentConfig c = SmallExample1();
  const CsvTable a = RunExample1(c);
  EXPECT_EQ(a.header, (std::vector<std::string>{"utility", "epsilon", "epsilon_over_epsmax",
                                                "perturbation_l2", "utility_loss", "feasible",
                                                "seed"}));
  ASSERT_EQ(a.rows.size(), 6u);
  for (const auto& row : a.rows) EXPECT_EQ(row.back(), "11");
  EXPECT_EQ(a.rows[0][0], "sqrt_sum");
  EXPECT_EQ(a.rows[3][0], "quad_sum");
  EXPECT_EQ(a.rows[2][3], "0");
  EXPECT_GT(ParseDouble(a.rows[0][3], "test"), 0.0);
  const fs::path p1 = TempDir() / "ex1a.csv", p2 = TempDir() / "ex1b.csv";
  WriteResults(a, p1);
  WriteResults(RunExample1(c), p2);
  EXPECT_EQ(ReadTextFile(p1), ReadTextFile(p2));
  EXPECT_EQ(ReadTextFile(p1).back(), '\n');
}

TEST(Example2Test, SmallRunShape) {
  ExperimentConfig c = Example2Defaults();
  c.k = 5;
  c.lambdas = {1.0, 1e5};
  c.alphas = {0.1};
  c.n_cdf = 2000;
  c.spsa.iters = 20;
  c.spsa.reps = 10;
  c.spsa.eval_reps = 50;
  c.seed = 4;
  const CsvTable t = RunExample2(c);
  EXPECT_EQ(t.header, (std::vector<std::string>{"lambda", "alpha", "type1_prob", "utility_loss",
                                                "iters", "seed"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "100000");
  EXPECT_EQ(t.rows[1][4], "20");
  EXPECT_EQ(t.rows[1][5], "4");
  EXPECT_EQ(RunExample2(c).ToString(), t.ToString());
  EXPECT_THROW(RunExample1(c), std::invalid_argument);
}

}  // namespace
}  // namespace metacog
