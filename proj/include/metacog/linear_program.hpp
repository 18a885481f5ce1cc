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

#ifndef METACOG_LINEAR_PROGRAM_HPP_
#define METACOG_LINEAR_PROGRAM_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "metacog/common.hpp"

namespace metacog {

// Dense linear program
//
//   minimize c'x  subject to  A x <= b,  x >= 0
//
// with A stored row-major (rows x cols).
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // rows * cols
  Vector b;
  Vector c;  // empty => pure feasibility

  LinearProgram(std::size_t num_rows, std::size_t num_cols)
      : rows(num_rows), cols(num_cols), a(num_rows * num_cols, 0.0),
        b(num_rows, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  Vector x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-10;
  double feasibility_tol = 1e-8;  // phase-one residual accepted as zero
  std::size_t max_pivots = 0;     // 0 => 50 * (rows + cols) + 1000
};

namespace internal {

// Two-phase tableau simplex with Bland's rule. Small dense problems only.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt)
      : m_(lp.rows), n_(lp.cols), opt_(opt) {
    std::size_t num_art = 0;
    for (double bi : lp.b) num_art += bi < 0.0 ? 1 : 0;
    art_begin_ = n_ + m_;
    width_ = n_ + m_ + num_art + 1;
    t_.assign((m_ + 1) * width_, 0.0);
    basis_.assign(m_, 0);
    std::size_t art = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) T(i, j) = sign * lp.at(i, j);
      T(i, n_ + i) = sign;
      T(i, width_ - 1) = sign * lp.b[i];
      if (sign < 0.0) {
        T(i, art) = 1.0;
        basis_[i] = art++;
      } else {
        basis_[i] = n_ + i;
      }
    }
    max_pivots_ = opt.max_pivots ? opt.max_pivots : 50 * (m_ + n_) + 1000;
  }

  LpResult Solve(const Vector& c) {
    LpResult res;
    if (art_begin_ + 1 < width_) {
      // Phase one: minimize the sum of artificials.
      for (std::size_t j = 0; j < width_; ++j) Obj(j) = 0.0;
      for (std::size_t j = art_begin_; j + 1 < width_; ++j) Obj(j) = 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (basis_[i] >= art_begin_) {
          for (std::size_t j = 0; j < width_; ++j) Obj(j) -= T(i, j);
        }
      }
      const LpStatus s = Iterate(width_ - 1, res.pivots);
      if (s == LpStatus::kIterationLimit) {
        res.status = s;
        return res;
      }
      if (-Obj(width_ - 1) > opt_.feasibility_tol) {
        res.status = LpStatus::kInfeasible;
        return res;
      }
      DriveOutArtificials(res.pivots);
    }
    // Phase two over structural and slack columns.
    for (std::size_t j = 0; j < width_; ++j) Obj(j) = 0.0;
    for (std::size_t j = 0; j < n_ && j < c.size(); ++j) Obj(j) = c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t bj = basis_[i];
      const double cb = bj < n_ && bj < c.size() ? c[bj] : 0.0;
      if (cb != 0.0) {
        for (std::size_t j = 0; j < width_; ++j) Obj(j) -= cb * T(i, j);
      }
    }
    res.status = Iterate(art_begin_, res.pivots);
    if (res.status != LpStatus::kOptimal) return res;
    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) res.x[basis_[i]] = T(i, width_ - 1);
    }
    res.objective = -Obj(width_ - 1);
    return res;
  }

 private:
  double& T(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double& Obj(std::size_t j) { return t_[m_ * width_ + j]; }

  // Pivots until no column below `col_end` has a negative reduced cost.
  LpStatus Iterate(std::size_t col_end, std::size_t& pivots) {
    while (true) {
      std::size_t enter = col_end;
      for (std::size_t j = 0; j < col_end; ++j) {
        if (Obj(j) < -opt_.cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter == col_end) return LpStatus::kOptimal;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double p = T(i, enter);
        if (p > opt_.pivot_tol) {
          const double ratio = T(i, width_ - 1) / p;
          if (ratio < best - 1e-14 ||
              (ratio <= best + 1e-14 && leave < m_ && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m_) return LpStatus::kUnbounded;
      if (++pivots > max_pivots_) return LpStatus::kIterationLimit;
      Pivot(leave, enter);
    }
  }

  void DriveOutArtificials(std::size_t& pivots) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(T(i, j)) > 1e-9) {
          Pivot(i, j);
          ++pivots;
          break;
        }
      }
      // A row with no usable column is redundant; its artificial stays basic
      // at zero and can never re-enter since phase two ignores those columns.
    }
  }

  void Pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / T(r, c);
    for (std::size_t j = 0; j < width_; ++j) T(r, j) *= inv;
    T(r, c) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_[i * width_ + c];
      if (f == 0.0) continue;
      double* row = &t_[i * width_];
      const double* prow = &t_[r * width_];
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

  std::size_t m_, n_;
  SimplexOptions opt_;
  std::size_t art_begin_ = 0;
  std::size_t width_ = 0;
  std::size_t max_pivots_ = 0;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace internal

inline LpResult SolveLinearProgram(const LinearProgram& lp,
                                   const SimplexOptions& opt = {}) {
  if (lp.a.size() != lp.rows * lp.cols || lp.b.size() != lp.rows) {
    throw std::invalid_argument("linear program: inconsistent shapes");
  }
  internal::Tableau tab(lp, opt);
  return tab.Solve(lp.c);
}

}  // namespace metacog

#endif  // METACOG_LINEAR_PROGRAM_HPP_
