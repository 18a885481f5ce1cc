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

#ifndef METACOG_CSV_HPP_
#define METACOG_CSV_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace metacog {

// Shortest round-trippable decimal form; locale independent.
inline std::string FormatDouble(double x) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    std::size_t b = cell.find_first_not_of(' ');
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double ParseDouble(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(context + ": not a number: '" + s + "'");
  }
  if (used != s.size()) {
    throw std::invalid_argument(context + ": not a number: '" + s + "'");
  }
  return v;
}

// Header plus rows of already formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string ToString() const {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    append_row(header);
    for (const auto& r : rows) append_row(r);
    return out;
  }
};

// Writes `contents` to `path`, failing with the offending directory named
// when the parent does not exist.
inline void WriteTextFile(const std::filesystem::path& path,
                          const std::string& contents) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw std::runtime_error("cannot write '" + path.string() +
                             "': directory '" + parent.string() +
                             "' does not exist");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  }
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void WriteCsv(const CsvTable& table,
                     const std::filesystem::path& path) {
  WriteTextFile(path, table.ToString());
}

inline std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace metacog

#endif  // METACOG_CSV_HPP_
