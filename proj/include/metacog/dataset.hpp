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

#ifndef METACOG_DATASET_HPP_
#define METACOG_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "metacog/common.hpp"
#include "metacog/csv.hpp"

namespace metacog {

enum class ResponseDomain {
  kNonnegative,  // responses chosen by the agent
  kRaw,          // noisy measurements; any sign allowed
};

/// Probe/response pairs (alpha_k, beta_k) observed over K epochs.
///
/// Probes are strictly positive. Responses are nonnegative unless the dataset
/// holds raw noisy measurements, in which case no sign is imposed.
class ProbeResponseDataset {
 public:
  ProbeResponseDataset(VectorSeq probes, VectorSeq responses,
                       ResponseDomain domain = ResponseDomain::kNonnegative)
      : probes_(std::move(probes)),
        responses_(std::move(responses)),
        domain_(domain) {
    Validate();
  }

  std::size_t size() const { return probes_.size(); }
  std::size_t dim() const { return probes_.front().size(); }
  const VectorSeq& probes() const { return probes_; }
  const VectorSeq& responses() const { return responses_; }
  const Vector& probe(std::size_t k) const { return probes_[k]; }
  const Vector& response(std::size_t k) const { return responses_[k]; }
  ResponseDomain domain() const { return domain_; }

  // alpha_t' (beta_s - beta_t): the budget cost of s's response at t's probe,
  // relative to t's own spend.
  double CrossCost(std::size_t t, std::size_t s) const {
    return DotDiff(probes_[t], responses_[s], responses_[t]);
  }

 private:
  void Validate() const {
    if (probes_.empty()) throw std::invalid_argument("dataset: K must be >= 1");
    if (probes_.size() != responses_.size()) {
      throw std::invalid_argument("dataset: probe/response count mismatch");
    }
    const std::size_t m = probes_.front().size();
    if (m == 0) throw std::invalid_argument("dataset: m must be >= 1");
    for (std::size_t k = 0; k < probes_.size(); ++k) {
      if (probes_[k].size() != m || responses_[k].size() != m) {
        throw std::invalid_argument("dataset: epoch " + std::to_string(k) +
                                    " has inconsistent dimension");
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (!(probes_[k][i] > 0.0) || !std::isfinite(probes_[k][i])) {
          throw std::invalid_argument("dataset: probe component must be > 0 "
                                      "(epoch " + std::to_string(k) + ")");
        }
        if (!std::isfinite(responses_[k][i]) ||
            (domain_ == ResponseDomain::kNonnegative &&
             responses_[k][i] < 0.0)) {
          throw std::invalid_argument(
              "dataset: response component must be >= 0 (epoch " +
              std::to_string(k) + ")");
        }
      }
    }
  }

  VectorSeq probes_;
  VectorSeq responses_;
  ResponseDomain domain_;
};

inline CsvTable DatasetToCsv(const ProbeResponseDataset& d) {
  CsvTable t;
  t.header.push_back("epoch");
  for (std::size_t i = 1; i <= d.dim(); ++i) {
    t.header.push_back("alpha_" + std::to_string(i));
  }
  for (std::size_t i = 1; i <= d.dim(); ++i) {
    t.header.push_back("beta_" + std::to_string(i));
  }
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    for (double a : d.probe(k)) row.push_back(FormatDouble(a));
    for (double b : d.response(k)) row.push_back(FormatDouble(b));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ProbeResponseDataset ParseDatasetCsv(
    const std::string& text,
    ResponseDomain domain = ResponseDomain::kNonnegative) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset csv: empty");
  const auto header = SplitCsvLine(line);
  if (header.size() < 3 || (header.size() - 1) % 2 != 0 ||
      header[0] != "epoch") {
    throw std::invalid_argument(
        "dataset csv: header must be epoch,alpha_1..alpha_m,beta_1..beta_m");
  }
  const std::size_t m = (header.size() - 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    if (header[1 + i] != "alpha_" + std::to_string(i + 1) ||
        header[1 + m + i] != "beta_" + std::to_string(i + 1)) {
      throw std::invalid_argument("dataset csv: unexpected column '" +
                                  header[1 + i] + "'");
    }
  }
  VectorSeq probes, responses;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCsvLine(line);
    const std::string ctx = "dataset csv line " + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw std::invalid_argument(ctx + ": expected " +
                                  std::to_string(header.size()) + " cells");
    }
    Vector a(m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = ParseDouble(cells[1 + i], ctx);
      b[i] = ParseDouble(cells[1 + m + i], ctx);
    }
    probes.push_back(std::move(a));
    responses.push_back(std::move(b));
  }
  return ProbeResponseDataset(std::move(probes), std::move(responses), domain);
}

inline ProbeResponseDataset LoadDatasetCsv(
    const std::filesystem::path& path,
    ResponseDomain domain = ResponseDomain::kNonnegative) {
  return ParseDatasetCsv(ReadTextFile(path), domain);
}

}  // namespace metacog

#endif  // METACOG_DATASET_HPP_
