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

#ifndef METACOG_MASKING_DET_HPP_
#define METACOG_MASKING_DET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "metacog/common.hpp"
#include "metacog/dataset.hpp"
#include "metacog/projection.hpp"
#include "metacog/radar_model.hpp"
#include "metacog/random.hpp"
#include "metacog/rp_core.hpp"
#include "metacog/utility.hpp"

namespace metacog {

struct DetMaskConfig {
  double epsilon = 0.0;
  int starts = 5;  // naive responses + (starts - 1) random budget points
  double penalty_start = 1.0;
  double penalty_end = 1e6;
  int inner_iters = 10000;  // per penalty stage
  double tol = 1e-9;        // accepted margin violation
  // Pairs solved per start, ranked by linearized cost; 0 = all.
  std::size_t max_pairs = 0;
  std::uint64_t seed = 0;

  void Validate() const {
    // Negative values are legal: a convex utility has a negative margin.
    if (!std::isfinite(epsilon)) {
      throw std::invalid_argument("mask_det: epsilon must be finite");
    }
    if (starts < 1) throw std::invalid_argument("mask_det: starts must be >= 1");
    if (!(penalty_start > 0.0) || penalty_end < penalty_start) {
      throw std::invalid_argument("mask_det: bad penalty schedule");
    }
  }
};

struct MaskingResult {
  VectorSeq masked;
  double perturbation = 0.0;  // sum_k |b~_k - b*_k|^2
  double utility_loss = 0.0;  // sum_k u(b*_k) - u(b~_k)
  double achieved_margin = 0.0;
  bool feasible = true;
  Vector diagnostics;  // best objective reached from each start
};

inline VectorSeq NaiveResponses(const UtilityModel& u, const VectorSeq& probes) {
  VectorSeq out;
  out.reserve(probes.size());
  for (const auto& a : probes) out.push_back(NaiveResponse(u, a));
  return out;
}

/// Pass-margin with gradients anchored at the naive responses:
///   min_{s != t} u(b_t) + grad u(b*_t)'(b_s - b_t) - u(b_s).
/// At b = b* this is the Afriat margin of the naive data.
inline double PassMargin(const VectorSeq& responses, const VectorSeq& naive,
                         const UtilityModel& u) {
  const std::size_t k = responses.size();
  Vector val(k);
  VectorSeq grad(k);
  for (std::size_t t = 0; t < k; ++t) {
    val[t] = EvalUtility(u, responses[t]);
    grad[t] = GradUtility(u, naive[t]);
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t s = 0; s < k; ++s) {
      if (s != t) {
        margin = std::min(margin, val[t] + DotDiff(grad[t], responses[s], responses[t]) - val[s]);
      }
    }
  }
  return margin;
}

/// Afriat pass-margin of the naive responses: the smallest epsilon that
/// needs no masking at all.
inline double EpsilonMax(const VectorSeq& probes, const UtilityModel& u) {
  if (probes.size() < 2) {
    throw std::invalid_argument("epsilon_max: needs K >= 2 epochs");
  }
  const VectorSeq naive = NaiveResponses(u, probes);
  return AfriatMargin(ProbeResponseDataset(probes, naive), u);
}

namespace internal {

// Minimum-distance repair of a single Afriat pair (s, t):
//
//   min |z_s - b*_s|^2 + |z_t - b*_t|^2
//   s.t. g(z) = u(z_t) - u(z_s) + c'(z_s - z_t) <= eps,  z_k in S_k,
//
// with c = grad u(b*_t) and S_k the budget face of epoch k. Quadratic penalty
// with a doubling weight, projected gradient with backtracking inside each
// stage, then a Newton-type restoration on g.
class PairRepair {
 public:
  PairRepair(const UtilityModel& u, const Vector& alpha_s, const Vector& alpha_t,
             const Vector& target_s, const Vector& target_t, Vector anchor_grad,
             double eps, const DetMaskConfig& cfg)
      : u_(u), alpha_s_(alpha_s), alpha_t_(alpha_t), target_s_(target_s),
        target_t_(target_t), c_(std::move(anchor_grad)), eps_(eps), cfg_(cfg) {}

  struct Outcome {
    Vector zs, zt;
    double objective = 0.0;
    double constraint = 0.0;  // g(z)
  };

  // When z_t starts where grad_t g vanishes (z_t = b*_t is a critical point
  // of u - c'z), the t block never moves under gradient steps. Runs from two
  // small tangent nudges are added and the best outcome kept.
  Outcome Solve(const Vector& zs, const Vector& zt) const {
    Outcome best = SolveFrom(zs, zt);
    Vector gs, gt;
    ConstraintGrad(zs, zt, gs, gt);
    if (zt.size() < 2 || TangentNorm2(gt, alpha_t_) > 1e-20 * (1.0 + SquaredNorm(gt))) {
      return best;
    }
    Vector dir(zt.size(), 0.0);
    dir.front() = 1.0 / alpha_t_.front();
    dir.back() = -1.0 / alpha_t_.back();
    const double scale = 1e-3 * std::sqrt(SquaredNorm(zt)) / std::sqrt(SquaredNorm(dir));
    for (double sign : {1.0, -1.0}) {
      Vector nudged(zt.size());
      for (std::size_t i = 0; i < zt.size(); ++i) nudged[i] = zt[i] + sign * scale * dir[i];
      Outcome o = SolveFrom(zs, ProjectBudget(nudged, alpha_t_));
      if (Better(o, best)) best = std::move(o);
    }
    return best;
  }

  bool Better(const Outcome& a, const Outcome& b) const {
    const bool fa = a.constraint - eps_ <= cfg_.tol;
    const bool fb = b.constraint - eps_ <= cfg_.tol;
    if (fa != fb) return fa;
    return fa ? a.objective < b.objective : a.constraint < b.constraint;
  }

  Outcome SolveFrom(Vector zs, Vector zt) const {
    double rho = cfg_.penalty_start;
    double step = 0.1;
    while (true) {
      Minimize(rho, zs, zt, step);
      if (rho >= cfg_.penalty_end) break;
      rho = std::min(2.0 * rho, cfg_.penalty_end);
    }
    Restore(zs, zt);
    Outcome o;
    o.objective = Objective(zs, zt);
    o.constraint = Constraint(zs, zt);
    o.zs = std::move(zs);
    o.zt = std::move(zt);
    return o;
  }

  double Constraint(const Vector& zs, const Vector& zt) const {
    return EvalUtility(u_, zt) - EvalUtility(u_, zs) + DotDiff(c_, zs, zt);
  }

  double Objective(const Vector& zs, const Vector& zt) const {
    return SquaredDistance(zs, target_s_) + SquaredDistance(zt, target_t_);
  }

 private:
  double Penalized(double rho, const Vector& zs, const Vector& zt) const {
    const double v = std::max(0.0, Constraint(zs, zt) - eps_);
    return Objective(zs, zt) + rho * v * v;
  }

  // grad g split by block.
  void ConstraintGrad(const Vector& zs, const Vector& zt, Vector& gs,
                      Vector& gt) const {
    const Vector us = GradUtilityFloored(u_, zs);
    const Vector ut = GradUtilityFloored(u_, zt);
    gs.resize(zs.size());
    gt.resize(zt.size());
    for (std::size_t i = 0; i < zs.size(); ++i) gs[i] = c_[i] - us[i];
    for (std::size_t i = 0; i < zt.size(); ++i) gt[i] = ut[i] - c_[i];
  }

  void Minimize(double rho, Vector& zs, Vector& zt, double& step) const {
    const std::size_t m = zs.size();
    Vector gs, gt, ns(m), nt(m);
    double f = Penalized(rho, zs, zt);
    for (int it = 0; it < cfg_.inner_iters; ++it) {
      const double viol = std::max(0.0, Constraint(zs, zt) - eps_);
      ConstraintGrad(zs, zt, gs, gt);
      Vector ds(m), dt(m);
      for (std::size_t i = 0; i < m; ++i) {
        ds[i] = 2.0 * (zs[i] - target_s_[i]) + 2.0 * rho * viol * gs[i];
        dt[i] = 2.0 * (zt[i] - target_t_[i]) + 2.0 * rho * viol * gt[i];
      }
      step *= 2.0;
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        for (std::size_t i = 0; i < m; ++i) {
          ns[i] = zs[i] - step * ds[i];
          nt[i] = zt[i] - step * dt[i];
        }
        ns = ProjectBudget(ns, alpha_s_);
        nt = ProjectBudget(nt, alpha_t_);
        const double fn = Penalized(rho, ns, nt);
        double lin = 0.0, dist = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          lin += ds[i] * (ns[i] - zs[i]) + dt[i] * (nt[i] - zt[i]);
          dist += (ns[i] - zs[i]) * (ns[i] - zs[i]) + (nt[i] - zt[i]) * (nt[i] - zt[i]);
        }
        if (fn <= f + lin + dist / (2.0 * step) + 1e-15 * std::abs(f)) {
          moved = dist > 0.0;
          const double rel = dist / (1e-30 + SquaredNorm(zs) + SquaredNorm(zt));
          zs = ns;
          zt = nt;
          f = fn;
          if (rel < 1e-26) moved = false;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }

  // Drive g(z) <= eps along -grad g with Newton-sized steps.
  void Restore(Vector& zs, Vector& zt) const {
    const std::size_t m = zs.size();
    Vector gs, gt;
    for (int it = 0; it < 200; ++it) {
      const double g = Constraint(zs, zt);
      if (g <= eps_ - 1e-13) return;
      ConstraintGrad(zs, zt, gs, gt);
      const double gn = SquaredNorm(gs) + SquaredNorm(gt);
      if (gn == 0.0) return;
      double tau = (g - eps_ + 1e-12) / gn;
      bool improved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Vector ns(m), nt(m);
        for (std::size_t i = 0; i < m; ++i) {
          ns[i] = zs[i] - tau * gs[i];
          nt[i] = zt[i] - tau * gt[i];
        }
        ns = ProjectBudget(ns, alpha_s_);
        nt = ProjectBudget(nt, alpha_t_);
        if (Constraint(ns, nt) < g) {
          zs = std::move(ns);
          zt = std::move(nt);
          improved = true;
          break;
        }
        tau *= 0.5;
      }
      if (!improved) return;
    }
  }

  static double TangentNorm2(const Vector& g, const Vector& alpha) {
    const double proj = Dot(g, alpha) / SquaredNorm(alpha);
    double n = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) n += (g[i] - proj * alpha[i]) * (g[i] - proj * alpha[i]);
    return n;
  }

  const UtilityModel& u_;
  const Vector& alpha_s_;
  const Vector& alpha_t_;
  const Vector& target_s_;
  const Vector& target_t_;
  Vector c_;
  double eps_;
  const DetMaskConfig& cfg_;
};

// Exact pair repair for m = 2, where each budget face is a segment.
//
// With H(z) = u(z) - c'z the pair constraint reads H(z_t) <= H(z_s) + eps.
// For a level tau the cheapest z_s is the point of S_s nearest b*_s with
// H >= tau, and the cheapest z_t the point of S_t nearest b*_t with
// H <= tau + eps; both are one-dimensional searches. The level is scanned and
// the best bracket refined by golden section. Works for any continuous u.
class SegmentPairRepair {
 public:
  static constexpr int kGrid = 1024;
  static constexpr int kLevels = 64;

  SegmentPairRepair(const UtilityModel& u, const Vector& alpha_s, const Vector& alpha_t,
                    const Vector& target_s, const Vector& target_t, const Vector& anchor_grad,
                    double eps)
      : u_(u), c_(anchor_grad), eps_(eps),
        s_(*this, alpha_s, target_s), t_(*this, alpha_t, target_t) {}

  // Cost at the cheapest end of each term; no level does better.
  double LowerBound() const {
    double lo, hi;
    if (!Levels(lo, hi)) return std::numeric_limits<double>::infinity();
    return Cost(lo, true).objective + Cost(hi, false).objective;
  }

  PairRepair::Outcome Solve() const {
    PairRepair::Outcome out;
    double lo, hi;
    const bool any = Levels(lo, hi);
    if (!any) {
      // No level works; report the naive pair as an infeasible outcome.
      out.zs = s_.Point(s_.x_star);
      out.zt = t_.Point(t_.x_star);
      out.objective = 0.0;
      out.constraint = t_.h_star - s_.h_star;
      return out;
    }
    auto cost = [&](double tau) { return Cost(tau).objective; };
    double best_tau = lo, best = cost(lo);
    const double step = (hi - lo) / kLevels;
    for (int i = 1; i <= kLevels && step > 0.0; ++i) {
      const double tau = i == kLevels ? hi : lo + i * step;
      const double c = cost(tau);
      if (c < best) {
        best = c;
        best_tau = tau;
      }
    }
    if (step > 0.0) {
      double a = std::max(lo, best_tau - step), b = std::min(hi, best_tau + step);
      const double r = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - r * (b - a), x2 = a + r * (b - a);
      double f1 = cost(x1), f2 = cost(x2);
      for (int it = 0; it < 100 && b - a > 1e-16 * (1.0 + std::abs(b)); ++it) {
        if (f1 <= f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - r * (b - a);
          f1 = cost(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + r * (b - a);
          f2 = cost(x2);
        }
      }
      for (double tau : {x1, x2}) {
        const double c = cost(tau);
        if (c < best) {
          best = c;
          best_tau = tau;
        }
      }
    }
    out = Cost(best_tau);
    return out;
  }

 private:
  struct Side {
    Side(const SegmentPairRepair& owner, const Vector& alpha, const Vector& target)
        : self(owner), a(alpha), top(1.0 / alpha[0]),
          scale(1.0 + (alpha[0] / alpha[1]) * (alpha[0] / alpha[1])),
          x_star(std::clamp(target[0], 0.0, 1.0 / alpha[0])), xs(kGrid + 1), hs(kGrid + 1) {
      for (int i = 0; i <= kGrid; ++i) {
        xs[i] = top * i / kGrid;
        hs[i] = H(xs[i]);
      }
      h_star = H(x_star);
      min_h = std::min(h_star, *std::min_element(hs.begin(), hs.end()));
      max_h = std::max(h_star, *std::max_element(hs.begin(), hs.end()));
      split = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x_star) - xs.begin());
      // Running extrema walking outward from x_star.
      up_right.resize(kGrid + 1);
      dn_right.resize(kGrid + 1);
      up_left.resize(kGrid + 1);
      dn_left.resize(kGrid + 1);
      double mx = h_star, mn = h_star;
      for (int i = split; i <= kGrid; ++i) {
        mx = std::max(mx, hs[i]);
        mn = std::min(mn, hs[i]);
        up_right[i] = mx;
        dn_right[i] = mn;
      }
      mx = mn = h_star;
      for (int i = split - 1; i >= 0; --i) {
        mx = std::max(mx, hs[i]);
        mn = std::min(mn, hs[i]);
        up_left[i] = mx;
        dn_left[i] = mn;
      }
    }

    Vector Point(double x) const { return {x, std::max(0.0, (1.0 - a[0] * x) / a[1])}; }
    double H(double x) const {
      const Vector z = Point(x);
      return EvalUtility(self.u_, z) - Dot(self.c_, z);
    }

    // Nearest x to x_star with H(x) >= level (above) or H(x) <= level (!above).
    std::optional<double> Nearest(double level, bool above) const {
      auto ok = [&](double h) { return above ? h >= level : h <= level; };
      if (ok(h_star)) return x_star;
      std::optional<double> best;
      // Right side: first grid index whose running extremum satisfies.
      {
        const auto& run = above ? up_right : dn_right;
        int lo = split, hi = kGrid + 1;
        while (lo < hi) {
          const int mid = (lo + hi) / 2;
          if (ok(run[mid])) {
            hi = mid;
          } else {
            lo = mid + 1;
          }
        }
        if (lo <= kGrid) best = Refine(lo == split ? x_star : xs[lo - 1], xs[lo], ok);
      }
      {
        const auto& run = above ? up_left : dn_left;
        int lo = -1, hi = split - 1;  // last index (largest) that satisfies
        while (lo < hi) {
          const int mid = (lo + hi + 1) / 2;
          if (ok(run[mid])) {
            lo = mid;
          } else {
            hi = mid - 1;
          }
        }
        if (lo >= 0) {
          const double x = Refine(lo == split - 1 ? x_star : xs[lo + 1], xs[lo], ok);
          if (!best || x_star - x < *best - x_star) best = x;
        }
      }
      return best;
    }

    // Bisection between a failing point and a satisfying point.
    template <typename Ok>
    double Refine(double bad, double good, Ok&& ok) const {
      for (int it = 0; it < 200 && bad != good; ++it) {
        const double mid = 0.5 * (bad + good);
        if (mid == bad || mid == good) break;
        (ok(H(mid)) ? good : bad) = mid;
      }
      return good;
    }

    const SegmentPairRepair& self;
    Vector a;
    double top, scale, x_star;
    Vector xs, hs;
    double h_star = 0.0, min_h = 0.0, max_h = 0.0;
    int split = 0;
    Vector up_right, dn_right, up_left, dn_left;
  };

  bool Levels(double& lo, double& hi) const {
    lo = std::max(s_.h_star, t_.min_h - eps_);
    hi = std::min(t_.h_star - eps_, s_.max_h);
    if (t_.h_star - s_.h_star <= eps_) lo = hi = s_.h_star;
    return lo <= hi;
  }

  // With `only` set, just the s term (true) or the t term (false) is costed.
  PairRepair::Outcome Cost(double tau, std::optional<bool> only = std::nullopt) const {
    PairRepair::Outcome o;
    const auto xs = only == false ? std::optional<double>(s_.x_star) : s_.Nearest(tau, true);
    const auto xt =
        only == true ? std::optional<double>(t_.x_star) : t_.Nearest(tau + eps_, false);
    if (!xs || !xt) {
      o.objective = std::numeric_limits<double>::infinity();
      o.constraint = std::numeric_limits<double>::infinity();
      return o;
    }
    o.zs = s_.Point(*xs);
    o.zt = t_.Point(*xt);
    o.objective = s_.scale * (*xs - s_.x_star) * (*xs - s_.x_star) +
                  t_.scale * (*xt - t_.x_star) * (*xt - t_.x_star);
    o.constraint = t_.H(*xt) - s_.H(*xs);
    return o;
  }

  const UtilityModel& u_;
  const Vector& c_;
  double eps_;
  Side s_;
  Side t_;
};

// Random point on the budget face: exponential weights spread over the spend.
inline Vector RandomBudgetPoint(const Vector& alpha, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector w(alpha.size());
  double total = 0.0;
  for (double& x : w) total += (x = expo(rng));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] / (total * alpha[i]);
  return w;
}

// Removes the component of g along alpha (budget tangent space).
inline double TangentSquaredNorm(const Vector& g, const Vector& alpha) {
  const double proj = Dot(g, alpha) / SquaredNorm(alpha);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] - proj * alpha[i];
    s += d * d;
  }
  return s;
}

}  // namespace internal

namespace internal {

struct RankedPair {
  double estimate;
  std::size_t s, t;
};

// Multi-start penalty solves for faces of dimension >= 2. Fills masked,
// feasible and diagnostics.
inline void SolveFromStarts(const VectorSeq& probes, const UtilityModel& u,
                            const DetMaskConfig& cfg, const VectorSeq& naive,
                            const VectorSeq& anchor, const std::vector<RankedPair>& pairs,
                            MaskingResult& res) {
  VectorSeq start_points = naive;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_violation = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  res.diagnostics.assign(static_cast<std::size_t>(cfg.starts), 0.0);
  for (int j = 0; j < cfg.starts; ++j) {
    if (j > 0) {
      Rng rng = MakeStream(cfg.seed, "mask-det-start", static_cast<std::uint64_t>(j));
      for (std::size_t q = 0; q < probes.size(); ++q) {
        start_points[q] = RandomBudgetPoint(probes[q], rng);
      }
    }
    double start_best = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) {
      PairRepair repair(u, probes[p.s], probes[p.t], naive[p.s], naive[p.t], anchor[p.t],
                        cfg.epsilon, cfg);
      auto out = repair.Solve(start_points[p.s], start_points[p.t]);
      const double violation = out.constraint - cfg.epsilon;
      const bool ok = violation <= cfg.tol;
      if (ok) start_best = std::min(start_best, out.objective);
      const bool better = ok ? (!have_feasible || out.objective < best_obj)
                             : (!have_feasible && violation < best_violation);
      if (better) {
        have_feasible = have_feasible || ok;
        best_obj = out.objective;
        best_violation = violation;
        res.masked = naive;
        res.masked[p.s] = std::move(out.zs);
        res.masked[p.t] = std::move(out.zt);
      }
    }
    res.diagnostics[static_cast<std::size_t>(j)] = start_best;
  }
  res.feasible = have_feasible;
}

// One exact solve per pair on segment faces (m = 2).
inline void SolveOnSegments(const VectorSeq& probes, const UtilityModel& u,
                            const DetMaskConfig& cfg, const VectorSeq& naive,
                            const VectorSeq& anchor, const std::vector<RankedPair>& pairs,
                            MaskingResult& res) {
  double best = std::numeric_limits<double>::infinity();
  double best_violation = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  for (const auto& p : pairs) {
    const SegmentPairRepair repair(u, probes[p.s], probes[p.t], naive[p.s], naive[p.t],
                                   anchor[p.t], cfg.epsilon);
    if (have_feasible && repair.LowerBound() >= best) continue;
    auto out = repair.Solve();
    const double violation = out.constraint - cfg.epsilon;
    const bool ok = violation <= cfg.tol;
    const bool better = ok ? (!have_feasible || out.objective < best)
                           : (!have_feasible && violation < best_violation);
    if (better) {
      have_feasible = have_feasible || ok;
      best = out.objective;
      best_violation = violation;
      res.masked = naive;
      res.masked[p.s] = std::move(out.zs);
      res.masked[p.t] = std::move(out.zt);
    }
  }
  res.feasible = have_feasible;
  res.diagnostics.assign(1, have_feasible ? best : std::numeric_limits<double>::infinity());
}

}  // namespace internal

/// Minimum-perturbation responses whose anchored pass-margin is at most eps.
///
/// The margin is a minimum over ordered pairs, so the feasible set is the
/// union over pairs (s, t) of {pair term <= eps}. Epochs outside the chosen
/// pair stay at their naive response; the program therefore decomposes into
/// one two-epoch repair per pair and the answer is the cheapest repair.
/// Pairs are ranked by the linearized repair cost and the best
/// `cfg.max_pairs` are solved (all of them when it is 0). With m = 2 each pair
/// is solved exactly on the budget segments; otherwise by the penalty method
/// from every start, and diagnostics hold the best objective per start.
inline MaskingResult MaskDeterministic(const VectorSeq& probes,
                                       const UtilityModel& u,
                                       const DetMaskConfig& cfg) {
  cfg.Validate();
  if (probes.size() < 2) throw std::invalid_argument("mask_det: needs K >= 2");
  const std::size_t k = probes.size();
  const std::size_t m = probes.front().size();
  const VectorSeq naive = NaiveResponses(u, probes);
  VectorSeq anchor(k);
  Vector util(k);
  for (std::size_t t = 0; t < k; ++t) {
    anchor[t] = GradUtility(u, naive[t]);
    util[t] = EvalUtility(u, naive[t]);
  }

  MaskingResult res;
  res.masked = naive;
  res.diagnostics.assign(m == 2 ? 1 : static_cast<std::size_t>(cfg.starts), 0.0);
  res.achieved_margin = PassMargin(naive, naive, u);
  if (res.achieved_margin <= cfg.epsilon) return res;

  std::vector<internal::RankedPair> pairs;
  pairs.reserve(k * (k - 1));
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t s = 0; s < k; ++s) {
      if (s == t) continue;
      const double g0 = util[t] + DotDiff(anchor[t], naive[s], naive[t]) - util[s];
      Vector gs = GradUtilityFloored(u, naive[s]);
      Vector gt = GradUtilityFloored(u, naive[t]);
      for (std::size_t i = 0; i < m; ++i) {
        gs[i] = anchor[t][i] - gs[i];
        gt[i] -= anchor[t][i];
      }
      const double slope = internal::TangentSquaredNorm(gs, probes[s]) +
                           internal::TangentSquaredNorm(gt, probes[t]);
      const double gap = g0 - cfg.epsilon;
      const double est = slope > 0.0 ? gap * gap / slope
                                     : std::numeric_limits<double>::infinity();
      pairs.push_back({est, s, t});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.estimate < b.estimate; });
  if (cfg.max_pairs > 0 && pairs.size() > cfg.max_pairs) pairs.resize(cfg.max_pairs);

  if (m == 2) {
    internal::SolveOnSegments(probes, u, cfg, naive, anchor, pairs, res);
  } else {
    internal::SolveFromStarts(probes, u, cfg, naive, anchor, pairs, res);
  }
  res.perturbation = 0.0;
  res.utility_loss = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    res.perturbation += SquaredDistance(res.masked[q], naive[q]);
    res.utility_loss += util[q] - EvalUtility(u, res.masked[q]);
  }
  res.achieved_margin = PassMargin(res.masked, naive, u);
  return res;
}

}  // namespace metacog

#endif  // METACOG_MASKING_DET_HPP_
