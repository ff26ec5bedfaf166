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

// Pointwise problems: the constrained Hamiltonian minimizer v[x, r] with its
// multiplier, and the price fixed point P[mu] of a state-costate snapshot.

#ifndef MFGC_POINTWISE_HPP_
#define MFGC_POINTWISE_HPP_

#include <span>
#include <vector>

#include "mfgc/model.hpp"

namespace mfgc {

using ActiveSet = std::vector<int>;

// Minimizer of L(x, v) + <r, v> subject to c(x, v) <= 0 and its multiplier.
struct KktPoint {
  Vec v;
  Vec nu;                // length n_c, zero off the active set
  ActiveSet active_set;  // sorted
  double stationarity_residual = 0.0;
  int iterations = 0;
};

// Primal active-set Newton method. `warm_active` seeds the working set; the
// result does not depend on it. Throws InfeasiblePoint when no working set
// yields a KKT point and MaxIterations when a Newton solve stalls.
KktPoint hamiltonian_min(const ModelSpec& model, const Vec& x, const Vec& r,
                         double tol, std::span<const int> warm_active = {});

struct KktResidual {
  double stationarity = 0.0;    // |D_v L + r + D_v c^T nu|
  double complementarity = 0.0; // |<nu, c>|
  double feasibility = 0.0;     // max(0, max_i c_i, max_i -nu_i)
};

KktResidual kkt_residual(const ModelSpec& model, const Vec& x, const Vec& r,
                         const Vec& v, const Vec& nu);

// Weighted collection of (state, costate) pairs.
struct MeasureSnapshot {
  std::vector<Vec> x;
  std::vector<Vec> q;
  std::vector<double> weights;

  std::size_t size() const { return x.size(); }
  // Throws SizeMismatch / ModelError on inconsistent sizes or weights that
  // do not sum to one within 1e-12.
  void validate() const;
};

struct PriceOptions {
  double tol = 1e-10;
  int max_iter = 400;
  double kkt_tol = 1e-12;
  // Starting price for the damped iteration (m > 1). Empty means zero.
  Vec initial;
  // Working-set guesses, one per snapshot point (may be empty).
  std::span<const ActiveSet> warm_active;
};

struct PriceResult {
  Vec price;
  std::vector<KktPoint> controls;  // v[x_k, P + b(x_k)^T q_k] per point
  double residual = 0.0;           // |P - psi(sum_k w_k v_k)|
  int iterations = 0;
};

// Solves P = psi(sum_k w_k v[x_k, P + b(x_k)^T q_k]). A scalar price takes
// one step of the price map from the starting guess, is then bracketed
// inside [-sup|psi|, sup|psi|] and found by a safeguarded bisection method;
// vector prices use a damped iteration whose step starts at 1/2 and is
// halved on residual growth down to 1/64. `iterations` counts price-map
// evaluations after the one at the starting guess. Throws NoConvergence.
PriceResult price_fixed_point(const ModelSpec& model, const MeasureSnapshot& mu,
                              const PriceOptions& options = {});

// The residual |P - psi(sum_k w_k v[x_k, P + b^T q_k])| at a given price.
double price_residual(const ModelSpec& model, const MeasureSnapshot& mu,
                      const Vec& price, double kkt_tol = 1e-12);

struct ContinuityProbe {
  double d1 = 0.0;
  double price_gap = 0.0;
};

ContinuityProbe price_continuity_probe(const ModelSpec& model,
                                       const MeasureSnapshot& mu1,
                                       const MeasureSnapshot& mu2,
                                       const PriceOptions& options = {});

}  // namespace mfgc

#endif  // MFGC_POINTWISE_HPP_
