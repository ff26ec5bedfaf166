// Copyright 2026 The mfgc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfgc/pointwise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "mfgc/error.hpp"
#include "mfgc/measures.hpp"

namespace mfgc {
namespace {

constexpr int kMaxNewton = 50;
constexpr int kMaxWorkingSetChanges = 64;

using Mask = std::uint64_t;

struct EqualitySolve {
  bool ok = false;
  Vec v;
  Vec nu_w;  // multipliers of the working set, in working-set order
};

ActiveSet mask_to_set(Mask mask, int nc) {
  ActiveSet s;
  for (int i = 0; i < nc; ++i) {
    if (mask & (Mask{1} << i)) s.push_back(i);
  }
  return s;
}

// Newton-Lagrange iteration for min L(x,v) + <r,v> s.t. c_W(x,v) = 0.
EqualitySolve solve_working_set(const ModelSpec& model, const Vec& x, const Vec& r,
                                const ActiveSet& w, Vec v, double tol) {
  const int m = model.dims.n_control;
  const int k = static_cast<int>(w.size());
  EqualitySolve out;
  if (k > m) return out;
  Vec nu = Vec::Zero(k);
  Mat kkt(m + k, m + k);
  Vec rhs(m + k);
  for (int it = 0; it < kMaxNewton; ++it) {
    Vec grad = model.running_cost_dv(x, v) + r;
    Mat hess = model.running_cost_dvv(x, v);
    Vec cw(k);
    Mat jw(k, m);
    if (k > 0) {
      const Vec c = model.mixed(x, v);
      const Mat jac = model.mixed_dv(x, v);
      std::vector<Mat> curv;
      if (model.mixed_dvv) curv = model.mixed_dvv(x, v);
      for (int i = 0; i < k; ++i) {
        cw(i) = c(w[i]);
        jw.row(i) = jac.row(w[i]);
        if (!curv.empty()) hess += nu(i) * curv.at(w[i]);
      }
      grad += jw.transpose() * nu;
    }
    const double res = std::max(grad.lpNorm<Eigen::Infinity>(),
                                k > 0 ? cw.lpNorm<Eigen::Infinity>() : 0.0);
    if (!std::isfinite(res)) return out;
    if (res <= tol && it > 0) {
      out.ok = true;
      out.v = std::move(v);
      out.nu_w = std::move(nu);
      return out;
    }
    kkt.setZero();
    kkt.topLeftCorner(m, m) = hess;
    if (k > 0) {
      kkt.topRightCorner(m, k) = jw.transpose();
      kkt.bottomLeftCorner(k, m) = jw;
    }
    rhs.head(m) = -grad;
    if (k > 0) rhs.tail(k) = -cw;
    Eigen::FullPivLU<Mat> lu(kkt);
    if (lu.rank() < m + k) return out;
    const Vec step = lu.solve(rhs);
    v += step.head(m);
    if (k > 0) nu += step.tail(k);
    if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
      // Converged to rounding; accept if the residual is close.
      if (res <= std::max(tol, 1e-10)) {
        out.ok = true;
        out.v = std::move(v);
        out.nu_w = std::move(nu);
        return out;
      }
    }
  }
  return out;
}

struct Candidate {
  bool kkt = false;
  int drop = -1;  // lowest working-set index with a negative multiplier
  int add = -1;   // lowest violated constraint outside the working set
  KktPoint point;
};

Candidate inspect(const ModelSpec& model, const Vec& x, const Vec& r,
                  const ActiveSet& w, const EqualitySolve& sol, double tol) {
  const int nc = model.dims.n_c;
  Candidate cand;
  Vec nu = Vec::Zero(nc);
  for (std::size_t i = 0; i < w.size(); ++i) nu(w[i]) = sol.nu_w(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (nu(w[i]) < -tol) {
      cand.drop = w[i];
      break;
    }
  }
  const Vec c = model.mixed(x, sol.v);
  for (int j = 0; j < nc; ++j) {
    if (std::find(w.begin(), w.end(), j) != w.end()) continue;
    if (c(j) > tol) {
      cand.add = j;
      break;
    }
  }
  cand.kkt = cand.drop < 0 && cand.add < 0;
  if (cand.kkt) {
    for (int i : w) nu(i) = std::max(0.0, nu(i));
    cand.point.v = sol.v;
    cand.point.nu = nu;
    cand.point.active_set = w;
    const Vec grad = model.running_cost_dv(x, sol.v) + r +
                     model.mixed_dv(x, sol.v).transpose() * nu;
    cand.point.stationarity_residual = grad.norm();
  }
  return cand;
}

}  // namespace

KktPoint hamiltonian_min(const ModelSpec& model, const Vec& x, const Vec& r,
                         double tol, std::span<const int> warm_active) {
  const int m = model.dims.n_control;
  const int nc = model.dims.n_c;
  if (nc > 63) throw ModelError("hamiltonian_min", "at most 63 mixed constraints");
  const Vec v0 = Vec::Zero(m);

  Mask mask = 0;
  for (int i : warm_active) {
    if (i >= 0 && i < nc) mask |= Mask{1} << i;
  }
  if (std::popcount(mask) > m) mask = 0;

  std::vector<Mask> visited;
  Vec v_start = v0;
  int iterations = 0;
  for (; iterations < kMaxWorkingSetChanges; ++iterations) {
    if (std::find(visited.begin(), visited.end(), mask) != visited.end()) {
      break;
    }
    visited.push_back(mask);
    const ActiveSet w = mask_to_set(mask, nc);
    const EqualitySolve sol = solve_working_set(model, x, r, w, v_start, tol);
    if (!sol.ok) {
      if (w.empty()) throw MaxIterations("hamiltonian_min", "unconstrained Newton solve failed");
      // Dependent or too many rows: release the highest-index constraint.
      mask &= ~(Mask{1} << w.back());
      continue;
    }
    Candidate cand = inspect(model, x, r, w, sol, tol);
    if (cand.kkt) {
      cand.point.iterations = iterations + 1;
      return cand.point;
    }
    v_start = sol.v;
    if (cand.drop >= 0) {
      mask &= ~(Mask{1} << cand.drop);
    } else {
      mask |= Mask{1} << cand.add;
    }
  }

  // Cycling guard: visit working sets in order of size, then index order.
  std::vector<Mask> order;
  for (Mask s = 0; s < (Mask{1} << nc); ++s) {
    if (std::popcount(s) <= m) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(), [](Mask a, Mask b) {
    return std::popcount(a) < std::popcount(b);
  });
  for (Mask s : order) {
    ++iterations;
    const ActiveSet w = mask_to_set(s, nc);
    const EqualitySolve sol = solve_working_set(model, x, r, w, v0, tol);
    if (!sol.ok) continue;
    Candidate cand = inspect(model, x, r, w, sol, tol);
    if (cand.kkt) {
      cand.point.iterations = iterations;
      return cand.point;
    }
  }
  throw InfeasiblePoint("hamiltonian_min", "no working set satisfies the KKT system");
}

KktResidual kkt_residual(const ModelSpec& model, const Vec& x, const Vec& r,
                         const Vec& v, const Vec& nu) {
  KktResidual out;
  Vec grad = model.running_cost_dv(x, v) + r;
  if (model.dims.n_c > 0) {
    const Vec c = model.mixed(x, v);
    grad += model.mixed_dv(x, v).transpose() * nu;
    out.complementarity = std::abs(nu.dot(c));
    out.feasibility = std::max({0.0, c.maxCoeff(), (-nu).maxCoeff()});
  }
  out.stationarity = grad.norm();
  return out;
}

void MeasureSnapshot::validate() const {
  if (q.size() != x.size() || weights.size() != x.size()) {
    throw SizeMismatch("MeasureSnapshot", "x, q and weights differ in size");
  }
  if (x.empty()) throw ModelError("MeasureSnapshot", "snapshot is empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ModelError("MeasureSnapshot", "negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ModelError("MeasureSnapshot", "weights do not sum to one");
  }
}

namespace {

struct ControlField {
  std::vector<KktPoint> points;
  Vec mean;
};

ControlField evaluate_controls(const ModelSpec& model, const MeasureSnapshot& mu,
                               const Vec& price, double kkt_tol,
                               std::span<const ActiveSet> warm) {
  ControlField field;
  field.points.reserve(mu.size());
  field.mean = Vec::Zero(model.dims.n_control);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Vec r = price + model.input(mu.x[k]).transpose() * mu.q[k];
    std::span<const int> guess;
    if (k < warm.size()) guess = warm[k];
    field.points.push_back(hamiltonian_min(model, mu.x[k], r, kkt_tol, guess));
    field.mean += mu.weights[k] * field.points.back().v;
  }
  return field;
}

}  // namespace

double price_residual(const ModelSpec& model, const MeasureSnapshot& mu,
                      const Vec& price, double kkt_tol) {
  const ControlField field = evaluate_controls(model, mu, price, kkt_tol, {});
  return (price - model.price(field.mean)).norm();
}

PriceResult price_fixed_point(const ModelSpec& model, const MeasureSnapshot& mu,
                              const PriceOptions& options) {
  mu.validate();
  const int m = model.dims.n_control;
  PriceResult out;

  if (m == 1) {
    // F(P) = P - psi(mean v(P)) is increasing: v[x, .] is monotone
    // nonincreasing and psi nondecreasing.
    Vec best_price;
    ControlField best_field;
    double best_abs = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    auto F = [&](double p) {
      ++evaluations;
      const Vec price = Vec::Constant(1, p);
      ControlField field = evaluate_controls(model, mu, price, options.kkt_tol,
                                             options.warm_active);
      const double f = p - model.price(field.mean)(0);
      if (std::abs(f) < best_abs) {
        best_abs = std::abs(f);
        best_price = price;
        best_field = std::move(field);
      }
      return f;
    };
    double bound = std::isfinite(model.price_bound) && model.price_bound > 0.0
                       ? model.price_bound
                       : 1.0;
    // Tightest known bracket [lo, hi] with F(lo) <= 0 <= F(hi).
    double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
    bool have_lo = false, have_hi = false;
    auto consider = [&](double p, double f) {
      if (f <= 0.0 && (!have_lo || p > lo)) {
        lo = p;
        flo = f;
        have_lo = true;
      }
      if (f >= 0.0 && (!have_hi || p < hi)) {
        hi = p;
        fhi = f;
        have_hi = true;
      }
    };
    // One application of the price map from the starting guess; a price
    // function that ignores the controls is solved here.
    const double p0 = options.initial.size() == 1 ? options.initial(0) : 0.0;
    const double f0 = F(p0);
    consider(p0, f0);
    if (best_abs > options.tol) consider(p0 - f0, F(p0 - f0));
    if (best_abs > options.tol) {
      if (!have_lo) consider(-bound, F(-bound));
      if (!have_hi) consider(bound, F(bound));
      while (!have_lo && bound < 1e12) {
        bound *= 4.0;
        consider(-bound, F(-bound));
      }
      while (!have_hi && bound < 1e12) {
        bound *= 4.0;
        consider(bound, F(bound));
      }
    }
    if (best_abs > options.tol && !(have_lo && have_hi)) {
      throw NoConvergence("price_fixed_point", "could not bracket the price", best_abs);
    }
    if (best_abs > options.tol && flo != 0.0 && fhi != 0.0) {
      std::uintmax_t iters = static_cast<std::uintmax_t>(options.max_iter);
      auto stop = [&](double a, double b) {
        return best_abs <= 0.01 * options.tol ||
               std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(a));
      };
      boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, stop, iters);
    }
    out.iterations = evaluations - 1;
    out.residual = best_abs;
    out.price = best_price;
    out.controls = std::move(best_field.points);
    if (!(out.residual <= options.tol)) {
      throw NoConvergence("price_fixed_point", "scalar price residual above tolerance",
                          out.residual);
    }
    return out;
  }

  Vec price = options.initial.size() == m ? options.initial : Vec::Zero(m);
  ControlField field = evaluate_controls(model, mu, price, options.kkt_tol, options.warm_active);
  Vec image = model.price(field.mean);
  double residual = (price - image).norm();
  double alpha = 0.5;
  constexpr double kAlphaFloor = 1.0 / 64.0;
  int it = 0;
  for (; it < options.max_iter && residual > options.tol; ++it) {
    const Vec trial = (1.0 - alpha) * price + alpha * image;
    ControlField trial_field =
        evaluate_controls(model, mu, trial, options.kkt_tol, options.warm_active);
    const Vec trial_image = model.price(trial_field.mean);
    const double trial_residual = (trial - trial_image).norm();
    if (trial_residual > residual && alpha > kAlphaFloor) {
      alpha = std::max(0.5 * alpha, kAlphaFloor);
      continue;
    }
    price = trial;
    field = std::move(trial_field);
    image = trial_image;
    residual = trial_residual;
  }
  out.price = price;
  out.controls = std::move(field.points);
  out.residual = residual;
  out.iterations = it;
  if (!(residual <= options.tol)) {
    throw NoConvergence("price_fixed_point", "damped price iteration above tolerance",
                        residual);
  }
  return out;
}

ContinuityProbe price_continuity_probe(const ModelSpec& model,
                                       const MeasureSnapshot& mu1,
                                       const MeasureSnapshot& mu2,
                                       const PriceOptions& options) {
  ContinuityProbe out;
  out.d1 = snapshot_distance(mu1, mu2).value;
  const PriceResult p1 = price_fixed_point(model, mu1, options);
  const PriceResult p2 = price_fixed_point(model, mu2, options);
  out.price_gap = (p1.price - p2.price).norm();
  return out;
}

}  // namespace mfgc
