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

// One agent's constrained optimal control problem against frozen coupling
// signals. Time is discretized with explicit Euler forward (state) and
// backward (costate) and a left-endpoint quadrature for the cost, so that the
// discrete optimality system below is exactly the KKT system of the discrete
// problem:
//
//   gamma_{k+1} = gamma_k + dt (a(gamma_k) + b(gamma_k) v_k)
//   p_k = p_{k+1} + dt [D_x L + D_x f + (Da + sum_i Db_i v_{k,i})^T p_{k+1}
//                       + D_x c^T nu_k]
//   p_N = Dg0 + Dg1^T lambda1 + Dg2^T lambda2
//   0 = D_v L(gamma_k, v_k) + P_k + b(gamma_k)^T p_{k+1} + D_v c^T nu_k
//
// The control on interval k is therefore v[gamma_k, P_k + b^T p_{k+1}].

#ifndef MFGC_OCP_HPP_
#define MFGC_OCP_HPP_

#include <functional>
#include <vector>

#include "mfgc/model.hpp"
#include "mfgc/pointwise.hpp"

namespace mfgc {

struct TimeGrid {
  double horizon = 1.0;
  int nt = 100;

  TimeGrid() = default;
  TimeGrid(double horizon_, int nt_);

  double dt() const { return horizon / nt; }
  double t(int k) const { return k == nt ? horizon : k * dt(); }
  int nodes() const { return nt + 1; }
  bool operator==(const TimeGrid&) const = default;
};

struct AgentTrajectory {
  Vec x0;
  std::vector<Vec> gamma;  // nt + 1 nodes
  std::vector<Vec> v;      // nt intervals (left node convention)
  std::vector<Vec> p;      // nt + 1 nodes
  std::vector<Vec> nu;     // nt intervals
  std::vector<ActiveSet> active;  // working sets per interval (warm starts)
  Vec lambda1;
  Vec lambda2;
  double cost = 0.0;
};

// Price path and state marginals seen by an agent. Both have one entry per
// node; the price at node k acts on interval k.
struct CouplingSignals {
  std::vector<Vec> price;
  std::vector<DiscreteMeasure> marginals;
  double f_grad_bound = 0.0;

  // Constant price, empty marginals.
  static CouplingSignals constant(const TimeGrid& grid, const Vec& price, int n_state);
  // Throws ModelError if any |P| exceeds `bound` (plus slack) or a marginal
  // is not normalized.
  void validate(double bound, double slack = 1e-9) const;
};

struct PmpResidual {
  double adjoint_residual = 0.0;          // costate recursion, rate form
  double stationarity_residual = 0.0;     // worst node
  // Sign, feasibility and complementarity of (nu, c) and (lambda2, g2).
  double complementarity_residual = 0.0;
  double terminal_residual = 0.0;         // |g1|, max(0, g2)
  double transversality_residual = 0.0;   // p_N against the terminal gradient
  double dynamics_residual = 0.0;         // Euler defect of the state path
  int worst_stationarity_node = -1;

  double max() const;
};

// Explicit Euler; throws NonFinite on overflow.
std::vector<Vec> integrate_state(const ModelSpec& model, const Vec& x0,
                                 const std::vector<Vec>& v_path, const TimeGrid& grid);

using FeedbackPolicy = std::function<Vec(int node, const Vec& state)>;
// Euler with a state feedback v_k = policy(k, gamma_k); returns states and
// writes the applied controls to `v_out` when non-null.
std::vector<Vec> integrate_feedback(const ModelSpec& model, const Vec& x0,
                                    const FeedbackPolicy& policy, const TimeGrid& grid,
                                    std::vector<Vec>* v_out = nullptr);

// Backward recursion from p_N = p_terminal with lambda0 = 1.
std::vector<Vec> integrate_costate(const ModelSpec& model, const std::vector<Vec>& gamma,
                                   const std::vector<Vec>& v_path,
                                   const std::vector<Vec>& nu_path, const Vec& p_terminal,
                                   const CouplingSignals& coupling, const TimeGrid& grid);

Vec terminal_costate(const ModelSpec& model, const Vec& gamma_T, const Vec& lambda1,
                     const Vec& lambda2, const DiscreteMeasure& m_T);

double cost_eval(const ModelSpec& model, const std::vector<Vec>& gamma,
                 const std::vector<Vec>& v_path, const CouplingSignals& coupling,
                 const TimeGrid& grid);

struct AgentOptions {
  double tol = 1e-7;         // target for every PMP residual component
  double sweep_tol = 0.0;    // costate change per sweep; 0 picks 1e-3 * tol * dt
  double terminal_tol = 0.0; // 0 picks tol
  double damping = 0.5;      // costate relaxation beta
  int max_sweeps = 5000;
  int max_multiplier_iter = 80;
  double kkt_tol = 1e-12;
};

// Forward-backward sweep on the feedback form, with the terminal multipliers
// found by shooting on g1(gamma_N) = 0 and min(lambda2, -g2(gamma_N)) = 0.
// `warm` (optional) seeds the costate, multipliers and working sets.
// Throws NoConvergence or InfeasiblePoint.
AgentTrajectory solve_agent(const ModelSpec& model, const Vec& x0,
                            const CouplingSignals& coupling, const TimeGrid& grid,
                            const AgentOptions& opts = {},
                            const AgentTrajectory* warm = nullptr);

PmpResidual pmp_residual(const ModelSpec& model, const AgentTrajectory& traj,
                         const CouplingSignals& coupling, const TimeGrid& grid);

struct TrajectoryBounds {
  double state = 0.0;         // sup |gamma|
  double costate = 0.0;       // sup |p|
  double state_rate = 0.0;    // sup |gamma'| (difference quotients)
  double costate_rate = 0.0;  // sup |p'|
};

TrajectoryBounds bounds_report(const std::vector<const AgentTrajectory*>& trajectories,
                               const TimeGrid& grid);

}  // namespace mfgc

#endif  // MFGC_OCP_HPP_
