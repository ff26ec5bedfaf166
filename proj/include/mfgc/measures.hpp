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

#ifndef MFGC_MEASURES_HPP_
#define MFGC_MEASURES_HPP_

// Empirical trajectory measures: time marginals, Wasserstein-1 distances,
// fictitious-play mixtures, Hoelder diagnostics and the pushforward from
// state-costate to state-control measures.

#include <memory>
#include <string>
#include <vector>

#include "mfgc/execution.hpp"
#include "mfgc/model.hpp"
#include "mfgc/ocp.hpp"
#include "mfgc/pointwise.hpp"
#include "mfgc/transport.hpp"

namespace mfgc {

// Ground metric on stacked points z = (x, q): Euclidean on the whole vector,
// or max(|x - x'|, |q - q'|) with the split after the first `split` entries.
struct GroundMetric {
  enum class Kind { kEuclidean, kSplitMax };
  Kind kind = Kind::kEuclidean;
  int split = 0;

  static GroundMetric euclidean() { return {}; }
  static GroundMetric split_max(int split) { return {Kind::kSplitMax, split}; }
  double operator()(const Vec& a, const Vec& b) const;
};

struct W1Result {
  double value = 0.0;
  bool exact = true;
  std::string method;  // "scalar", "product", "assignment", "lp", "sinkhorn"
};

// Wasserstein-1 distance between normalized weighted point lists.
W1Result wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      const GroundMetric& metric = {}, const TransportLimits& limits = {});

// W1 between two state-costate snapshots with ground metric
// max(|x - x'|, |q - q'|).
W1Result snapshot_distance(const MeasureSnapshot& a, const MeasureSnapshot& b);

enum class MeasureKind { kStateCostate, kStateControl };

struct Particle {
  std::shared_ptr<const AgentTrajectory> path;
  double weight = 0.0;
  int atom = 0;  // index of the initial-distribution atom the path starts from
};

struct ParticleMeasure {
  ParticleMeasure(TimeGrid grid_, MeasureKind kind_) : grid(grid_), kind(kind_) {}

  TimeGrid grid;
  MeasureKind kind;
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  // Total weight of every atom id (indexed by atom, sized to the largest id).
  std::vector<double> atom_mass() const;
  // Throws ModelError on weights not summing to one within 1e-12 and
  // IncompatibleGrids on paths inconsistent with the grid.
  void validate() const;
};

// Weighted points gamma_i(t_k).
DiscreteMeasure marginal_state(const ParticleMeasure& kappa, int node);

// Pairs (gamma_i(t_k), p_i(t_k)); throws WrongKind on state-control measures.
MeasureSnapshot marginal_state_costate(const ParticleMeasure& kappa, int node);

// Snapshot that determines the price on interval k: pairs
// (gamma_i(t_k), p_i(t_{k+1})), matching the control used by the Euler
// scheme on that interval. At the last node the costate is p_i(T).
MeasureSnapshot price_snapshot(const ParticleMeasure& kappa, int node);

enum class CapScope { kGlobal, kPerAtom };

struct MixtureResult {
  ParticleMeasure measure;
  double dropped_mass = 0.0;
};

// Concatenates weighted measures, merges identical particles of the same atom
// (sup-norm distance <= 1e-12), and enforces the support cap by dropping the
// lowest-weight particles (among equal weights, the oldest go first). kGlobal renormalizes the whole measure; kPerAtom
// caps each atom separately and rescales within the atom so the initial
// marginal is preserved. support_cap <= 0 disables the cap. With
// protect_last, particles of the last measure are never dropped (the cap
// removes older particles instead), which keeps fictitious play admitting
// its newest best response even when that response is the lightest particle.
MixtureResult mixture(const std::vector<const ParticleMeasure*>& measures,
                      const std::vector<double>& weights, int support_cap,
                      CapScope scope = CapScope::kGlobal, bool protect_last = false);

// W1 between particle measures with the node-wise sup-norm ground distance
// max_k max(|gamma - gamma'|, |p - p'|) (controls replace costates for kind eta).
W1Result trajectory_d1(const ParticleMeasure& a, const ParticleMeasure& b);

struct HolderResult {
  double worst_ratio = 0.0;
  double bound = 0.0;
  bool holds = true;
  int node_s = 0;
  int node_t = 0;
  bool exact = true;
};

// max over node pairs of d1(mu_t, mu_s) / |t - s|^(1/2) for the state-costate
// marginals, against T^(1/2) max(M3, M4) (1 + 1e-6).
HolderResult holder_check(const ParticleMeasure& kappa, double m3, double m4);

// Recomputes every particle's control nodewise as v[gamma_k, P_k + b^T p_{k+1}]
// and returns the state-control measure with the same weights.
ParticleMeasure lagrangian_pushforward(const ParticleMeasure& kappa,
                                       const CouplingSignals& coupling,
                                       const ModelSpec& model, double kkt_tol = 1e-12,
                                       ExecutionPolicy policy = ExecutionPolicy::kSerial);

}  // namespace mfgc

#endif  // MFGC_MEASURES_HPP_
