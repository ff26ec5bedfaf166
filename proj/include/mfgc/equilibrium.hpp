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

#ifndef MFGC_EQUILIBRIUM_HPP_
#define MFGC_EQUILIBRIUM_HPP_

// Fictitious-play outer loop over state-costate measures, equilibrium
// certificates, and the multi-start uniqueness experiment.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfgc/execution.hpp"
#include "mfgc/measures.hpp"
#include "mfgc/model.hpp"
#include "mfgc/ocp.hpp"

namespace mfgc {

enum class DampingSchedule { kConstant, kHarmonic };

struct SolveConfig {
  double horizon = 1.0;
  int nt = 100;
  InitialDistribution m0;
  DampingSchedule schedule = DampingSchedule::kHarmonic;
  double omega = 0.5;        // constant schedule weight
  int support_cap = 8;       // particles kept per initial atom
  double price_tol = 1e-6;   // sup-node price change
  double agent_tol = 1e-8;   // PMP residual target of each best response
  double exploitability_tol = 1e-4;  // relative to 1 + |mean cost|
  int max_iter = 200;
  std::uint64_t seed = 0;    // 0: zero initial costates; otherwise random
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  TimeGrid grid() const { return TimeGrid(horizon, nt); }
  // Weight of the best response at outer iteration k (k >= 1): 1 at the
  // first iteration, then omega (constant) or 1/k (harmonic).
  double weight(int k) const;
  // Throws ModelError naming the offending field.
  void validate() const;
};

// Initial state-costate measure: one particle per atom of m0 with the atom's
// weight. Costates are zero (seed 0) or a constant drawn per atom from the
// seed; states follow the feedback v[gamma, b^T p] with zero price.
ParticleMeasure initial_measure(const ModelSpec& model, const DiscreteMeasure& atoms,
                                const TimeGrid& grid, std::uint64_t seed);

// Coupling induced by a state-costate measure: m_t = marginal_state and
// P_k = price_fixed_point(price_snapshot(kappa, k)) at every node.
CouplingSignals induced_coupling(const ModelSpec& model, const ParticleMeasure& kappa,
                                 const PriceOptions& options = {},
                                 ExecutionPolicy policy = ExecutionPolicy::kSerial);

struct BestResponse {
  CouplingSignals coupling;
  // One optimal trajectory per atom (index = atom id).
  std::vector<std::shared_ptr<const AgentTrajectory>> agents;
  std::vector<double> atom_weights;
  int failures = 0;             // atoms that kept their previous particle
  std::string failure_message;  // first failure, if any
  // The best responses as a state-costate measure.
  ParticleMeasure measure(const TimeGrid& grid) const;
};

// Computes the coupling induced by kappa, then solves one optimal control
// problem per atom. `warm` (optional, indexed by atom) seeds the solves.
// Atoms whose solve fails keep their heaviest kappa particle; more than 10%
// failures throws NoConvergence.
BestResponse best_response(const ModelSpec& model, const ParticleMeasure& kappa,
                           const AgentOptions& agent, ExecutionPolicy policy,
                           const std::vector<std::shared_ptr<const AgentTrajectory>>* warm =
                               nullptr,
                           const PriceOptions& price = {});

struct IterationRecord {
  int iteration = 0;
  double price_change = 0.0;        // sup over nodes, vs previous coupling
  double marginal_d1_change = 0.0;  // sup over nodes, vs previous kappa
  double exploitability = 0.0;
  double mean_cost = 0.0;
  TrajectoryBounds bounds;
  int support = 0;
  double dropped_mass = 0.0;
};

using ConvergenceTrace = std::vector<IterationRecord>;

struct Certificate {
  double exploitability = 0.0;
  double price_consistency = 0.0;
  PmpResidual pmp;                  // worst over the best responses
  double eta_stationarity = 0.0;    // worst over the pushforward particles
};

enum class SolveStatus { kConverged, kMaxIter, kFailed };
const char* to_string(SolveStatus status);

struct EquilibriumReport {
  SolveStatus status = SolveStatus::kFailed;
  std::string message;
  TimeGrid grid{1.0, 1};
  DiscreteMeasure atoms;
  CouplingSignals coupling;
  std::optional<ParticleMeasure> kappa;
  std::optional<ParticleMeasure> eta;
  BestResponse responses;  // best responses against `coupling`
  ConvergenceTrace trace;
  Certificate certificate;
  double mean_cost = 0.0;
  int iterations = 0;
};

// Fictitious play kappa <- mixture((kappa, BR), (1 - w_k, w_k), cap per atom)
// until the price change is <= price_tol and the exploitability is
// <= exploitability_tol (1 + |mean cost|). Never throws on non-convergence:
// the status records the stopping cause.
EquilibriumReport solve_equilibrium(const ModelSpec& model, const SolveConfig& config);

// Sum_i w_i [J(gamma_i, v_i) - J*(x0_i)] under a frozen coupling, where J*
// is the optimal cost from the particle's initial atom. `optimal_cost`
// (optional, indexed by atom) reuses known optimal values.
double exploitability(const ModelSpec& model, const ParticleMeasure& eta,
                      const CouplingSignals& coupling, const AgentOptions& agent = {},
                      const std::vector<double>* optimal_cost = nullptr,
                      ExecutionPolicy policy = ExecutionPolicy::kSerial);

// max_k |P_k - psi(sum_i w_i v_i(t_k))| over the control nodes.
double price_consistency(const ModelSpec& model, const ParticleMeasure& eta,
                         const CouplingSignals& coupling);

using MeanFieldTerm = std::function<double(const Vec&, const DiscreteMeasure&)>;

// min over pairs of int (phi(x, m1) - phi(x, m2)) d(m1 - m2)(x).
double monotonicity_probe(const MeanFieldTerm& phi,
                          const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& pairs);

// Random measure pairs inside the model's probe box.
std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> random_measure_pairs(
    const ModelSpec& model, int count, int points_per_measure, std::uint64_t seed);

// Minimum over sampled segments of (phi(a) + phi(b))/2 - phi((a+b)/2),
// normalized by |a - b|^2; positive values indicate strict convexity.
double potential_convexity_probe(const ModelSpec& model, int count, std::uint64_t seed);

struct MonotonicityTerms {
  double price = 0.0;     // int <P2 - P1, v> d(eta1 - eta2) dt
  double terminal = 0.0;  // int (g0(., m1_T) - g0(., m2_T)) d(m1_T - m2_T)
  double running = 0.0;   // int int (f(., m1_t) - f(., m2_t)) d(m1_t - m2_t) dt
};

// Terms of the uniqueness argument for two state-control measures and
// their couplings on a shared grid.
MonotonicityTerms monotonicity_terms(const ModelSpec& model, const ParticleMeasure& eta1,
                                     const CouplingSignals& c1, const ParticleMeasure& eta2,
                                     const CouplingSignals& c2);

struct UniquenessReport {
  bool preconditions_ok = true;
  double congestion_monotonicity = 0.0;  // min probe value for f
  double terminal_monotonicity = 0.0;    // min probe value for g0
  double potential_convexity = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<SolveStatus> statuses;
  std::vector<double> mean_costs;
  double price_gap = 0.0;      // max pairwise sup-norm price gap
  double cost_gap = 0.0;       // max pairwise sup-norm gap of per-atom optimal costs
  double mean_cost_gap = 0.0;  // max pairwise mean-cost gap
  double max_term = 0.0;       // max |term| of the monotonicity terms over pairs
  std::vector<EquilibriumReport> runs;
};

// Solves from n_starts seeds (config.seed, config.seed + 1, ...) and compares.
UniquenessReport uniqueness_experiment(const ModelSpec& model, const SolveConfig& config,
                                       int n_starts);

}  // namespace mfgc

#endif  // MFGC_EQUILIBRIUM_HPP_
