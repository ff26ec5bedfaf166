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

#include "mfgc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>

#include "mfgc/error.hpp"

namespace mfgc {

double GroundMetric::operator()(const Vec& a, const Vec& b) const {
  if (kind == Kind::kEuclidean) return (a - b).norm();
  const Eigen::Index tail = a.size() - split;
  return std::max((a.head(split) - b.head(split)).norm(),
                  (a.tail(tail) - b.tail(tail)).norm());
}

namespace {

void require_normalized(const std::vector<double>& w, const char* op) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ModelError(op, "negative or non-finite weight");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ModelError(op, "weights do not sum to one");
}

DiscreteMeasure stack_snapshot(const MeasureSnapshot& s) {
  std::vector<Vec> z;
  z.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vec zi(s.x[i].size() + s.q[i].size());
    zi << s.x[i], s.q[i];
    z.push_back(std::move(zi));
  }
  return DiscreteMeasure(std::move(z), s.weights);
}

// Node-wise sup-norm distance between two paths of the given kind.
double path_distance(const AgentTrajectory& a, const AgentTrajectory& b, MeasureKind kind) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.gamma.size(); ++k) {
    d = std::max(d, (a.gamma[k] - b.gamma[k]).norm());
  }
  const std::vector<Vec>& sa = kind == MeasureKind::kStateCostate ? a.p : a.v;
  const std::vector<Vec>& sb = kind == MeasureKind::kStateCostate ? b.p : b.v;
  for (std::size_t k = 0; k < sa.size(); ++k) d = std::max(d, (sa[k] - sb[k]).norm());
  return d;
}

double quantize(double w) {
  int e = 0;
  const double m = std::frexp(w, &e);
  return std::ldexp(std::round(std::ldexp(m, 36)), e - 36);
}

std::vector<double> weights_of(const ParticleMeasure& m) {
  std::vector<double> w;
  w.reserve(m.size());
  for (const Particle& p : m.particles) w.push_back(p.weight);
  return w;
}

}  // namespace

W1Result wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      const GroundMetric& metric, const TransportLimits& limits) {
  if (a.empty() || b.empty()) throw ModelError("wasserstein1", "empty measure");
  if (a.dim() != b.dim()) throw SizeMismatch("wasserstein1", "point dimensions differ");
  require_normalized(a.weights(), "wasserstein1");
  require_normalized(b.weights(), "wasserstein1");
  W1Result out;
  const bool scalar = a.dim() == 1 && (metric.kind == GroundMetric::Kind::kEuclidean ||
                                       metric.split == 0 || metric.split == 1);
  if (scalar) {
    std::vector<double> xa, xb;
    for (const Vec& p : a.points()) xa.push_back(p(0));
    for (const Vec& p : b.points()) xb.push_back(p(0));
    out.value = scalar_w1(xa, a.weights(), xb, b.weights());
    out.method = "scalar";
    return out;
  }
  Mat cost(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) cost(i, j) = metric(a.points()[i], b.points()[j]);
  const TransportResult t = optimal_transport(cost, a.weights(), b.weights(), limits);
  out.value = t.value;
  out.exact = t.exact;
  out.method = t.method;
  return out;
}

W1Result snapshot_distance(const MeasureSnapshot& a, const MeasureSnapshot& b) {
  a.validate();
  b.validate();
  if (a.x.front().size() != b.x.front().size()) {
    throw SizeMismatch("snapshot_distance", "state dimensions differ");
  }
  const int split = static_cast<int>(a.x.front().size());
  return wasserstein1(stack_snapshot(a), stack_snapshot(b), GroundMetric::split_max(split));
}

std::vector<double> ParticleMeasure::atom_mass() const {
  std::vector<double> mass;
  for (const Particle& p : particles) {
    if (p.atom < 0) throw ModelError("ParticleMeasure", "negative atom id");
    if (static_cast<std::size_t>(p.atom) >= mass.size()) mass.resize(p.atom + 1, 0.0);
    mass[p.atom] += p.weight;
  }
  return mass;
}

void ParticleMeasure::validate() const {
  if (particles.empty()) throw ModelError("ParticleMeasure", "measure is empty");
  require_normalized(weights_of(*this), "ParticleMeasure");
  for (const Particle& p : particles) {
    if (!p.path) throw ModelError("ParticleMeasure", "null particle");
    const auto& t = *p.path;
    if (static_cast<int>(t.gamma.size()) != grid.nodes() ||
        static_cast<int>(t.p.size()) != grid.nodes() ||
        static_cast<int>(t.v.size()) != grid.nt) {
      throw IncompatibleGrids("ParticleMeasure", "particle inconsistent with the grid");
    }
  }
}

DiscreteMeasure marginal_state(const ParticleMeasure& kappa, int node) {
  if (node < 0 || node > kappa.grid.nt) throw ModelError("marginal_state", "node out of range");
  std::vector<Vec> pts;
  std::vector<double> w;
  pts.reserve(kappa.size());
  w.reserve(kappa.size());
  for (const Particle& p : kappa.particles) {
    pts.push_back(p.path->gamma[node]);
    w.push_back(p.weight);
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

namespace {

MeasureSnapshot snapshot_with_costate_node(const ParticleMeasure& kappa, int node,
                                           int costate_node, const char* op) {
  if (kappa.kind != MeasureKind::kStateCostate) {
    throw WrongKind(op, "requires a state-costate measure");
  }
  if (node < 0 || node > kappa.grid.nt) throw ModelError(op, "node out of range");
  MeasureSnapshot s;
  s.x.reserve(kappa.size());
  s.q.reserve(kappa.size());
  s.weights.reserve(kappa.size());
  for (const Particle& p : kappa.particles) {
    s.x.push_back(p.path->gamma[node]);
    s.q.push_back(p.path->p[costate_node]);
    s.weights.push_back(p.weight);
  }
  return s;
}

}  // namespace

MeasureSnapshot marginal_state_costate(const ParticleMeasure& kappa, int node) {
  return snapshot_with_costate_node(kappa, node, node, "marginal_state_costate");
}

MeasureSnapshot price_snapshot(const ParticleMeasure& kappa, int node) {
  return snapshot_with_costate_node(kappa, node, std::min(node + 1, kappa.grid.nt),
                                    "price_snapshot");
}

MixtureResult mixture(const std::vector<const ParticleMeasure*>& measures,
                      const std::vector<double>& weights, int support_cap, CapScope scope,
                      bool protect_last) {
  if (measures.empty() || measures.size() != weights.size()) {
    throw SizeMismatch("mixture", "one weight per measure required");
  }
  require_normalized(weights, "mixture");
  const ParticleMeasure& first = *measures.front();
  for (const ParticleMeasure* m : measures) {
    if (!(m->grid == first.grid)) throw IncompatibleGrids("mixture", "time grids differ");
    if (m->kind != first.kind) throw IncompatibleGrids("mixture", "measure kinds differ");
  }
  std::vector<Particle> merged;
  std::vector<char> fresh;  // particles that the cap must not drop
  for (std::size_t j = 0; j < measures.size(); ++j) {
    if (weights[j] == 0.0) continue;
    for (const Particle& p : measures[j]->particles) {
      const double w = weights[j] * p.weight;
      if (w == 0.0) continue;
      bool absorbed = false;
      for (Particle& q : merged) {
        if (q.atom != p.atom) continue;
        if (q.path == p.path || path_distance(*q.path, *p.path, first.kind) <= 1e-12) {
          q.weight += w;
          absorbed = true;
          break;
        }
      }
      if (!absorbed) {
        merged.push_back({p.path, w, p.atom});
        fresh.push_back(protect_last && j + 1 == measures.size());
      }
    }
  }

  MixtureResult out{ParticleMeasure(first.grid, first.kind), 0.0};
  // Indices of particles sorted by decreasing weight (ties keep order).
  auto keep_heaviest = [&](std::vector<std::size_t>& idx) {
    // Heaviest first. Weights equal to ~11 significant digits count as ties
    // and keep the later (newer) particle, so equal-weight averaging keeps
    // admitting fresh particles.
    std::vector<double> key(merged.size());
    for (std::size_t i : idx) {
      key[i] = fresh[i] ? std::numeric_limits<double>::infinity() : quantize(merged[i].weight);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
      if (key[l] != key[r]) return key[l] > key[r];
      return l > r;
    });
    std::vector<char> keep(merged.size(), 0);
    double kept = 0.0, dropped = 0.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (r < static_cast<std::size_t>(support_cap)) {
        keep[idx[r]] = 1;
        kept += merged[idx[r]].weight;
      } else {
        dropped += merged[idx[r]].weight;
      }
    }
    return std::make_tuple(keep, kept, dropped);
  };

  std::vector<double> scale(merged.size(), 1.0);
  std::vector<char> keep(merged.size(), 1);
  if (support_cap > 0) {
    if (scope == CapScope::kGlobal) {
      if (merged.size() > static_cast<std::size_t>(support_cap)) {
        std::vector<std::size_t> idx(merged.size());
        std::iota(idx.begin(), idx.end(), 0);
        auto [k, kept, dropped] = keep_heaviest(idx);
        keep = k;
        out.dropped_mass = dropped;
        for (double& s : scale) s = (kept + dropped) / kept;
      }
    } else {
      std::vector<std::vector<std::size_t>> by_atom;
      for (std::size_t i = 0; i < merged.size(); ++i) {
        const int a = merged[i].atom;
        if (static_cast<std::size_t>(a) >= by_atom.size()) by_atom.resize(a + 1);
        by_atom[a].push_back(i);
      }
      for (auto& idx : by_atom) {
        if (idx.size() <= static_cast<std::size_t>(support_cap)) continue;
        auto [k, kept, dropped] = keep_heaviest(idx);
        for (std::size_t i : idx) {
          keep[i] = k[i];
          scale[i] = (kept + dropped) / kept;
        }
        out.dropped_mass += dropped;
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (!keep[i]) continue;
    Particle p = merged[i];
    p.weight *= scale[i];
    total += p.weight;
    out.measure.particles.push_back(std::move(p));
  }
  // Remove accumulated rounding so the result is normalized.
  for (Particle& p : out.measure.particles) p.weight /= total;
  return out;
}

W1Result trajectory_d1(const ParticleMeasure& a, const ParticleMeasure& b) {
  if (!(a.grid == b.grid)) throw IncompatibleGrids("trajectory_d1", "time grids differ");
  if (a.kind != b.kind) throw IncompatibleGrids("trajectory_d1", "measure kinds differ");
  require_normalized(weights_of(a), "trajectory_d1");
  require_normalized(weights_of(b), "trajectory_d1");
  Mat cost(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      cost(i, j) = path_distance(*a.particles[i].path, *b.particles[j].path, a.kind);
  const TransportResult t = optimal_transport(cost, weights_of(a), weights_of(b));
  return {t.value, t.exact, t.method};
}

HolderResult holder_check(const ParticleMeasure& kappa, double m3, double m4) {
  if (kappa.kind != MeasureKind::kStateCostate) {
    throw WrongKind("holder_check", "requires a state-costate measure");
  }
  const int nodes = kappa.grid.nodes();
  HolderResult out;
  out.bound = std::sqrt(kappa.grid.horizon) * std::max(m3, m4) * (1.0 + 1e-6);
  std::vector<DiscreteMeasure> snaps;
  snaps.reserve(nodes);
  for (int k = 0; k < nodes; ++k) snaps.push_back(stack_snapshot(marginal_state_costate(kappa, k)));
  if (kappa.particles.empty()) throw ModelError("holder_check", "measure is empty");
  const int n = static_cast<int>(kappa.particles.front().path->gamma.front().size());
  const GroundMetric metric = GroundMetric::split_max(n);
  // Largest separations first: the synchronous coupling (each particle with
  // itself) bounds d1 from above, so pairs whose bound cannot beat the
  // current maximum are skipped without changing the result.
  for (int gap = nodes - 1; gap >= 1; --gap) {
    const double scale = 1.0 / std::sqrt(gap * kappa.grid.dt());
    for (int s = 0; s + gap < nodes; ++s) {
      const int t = s + gap;
      double upper = 0.0;
      for (std::size_t i = 0; i < kappa.size(); ++i) {
        upper += kappa.particles[i].weight * metric(snaps[s].points()[i], snaps[t].points()[i]);
      }
      if (upper * scale <= out.worst_ratio) continue;
      const W1Result d = wasserstein1(snaps[s], snaps[t], metric);
      out.exact = out.exact && d.exact;
      if (d.value * scale > out.worst_ratio) {
        out.worst_ratio = d.value * scale;
        out.node_s = s;
        out.node_t = t;
      }
    }
  }
  out.holds = out.worst_ratio <= out.bound;
  return out;
}

ParticleMeasure lagrangian_pushforward(const ParticleMeasure& kappa,
                                       const CouplingSignals& coupling,
                                       const ModelSpec& model, double kkt_tol,
                                       ExecutionPolicy policy) {
  if (kappa.kind != MeasureKind::kStateCostate) {
    throw WrongKind("lagrangian_pushforward", "requires a state-costate measure");
  }
  const int nt = kappa.grid.nt;
  if (static_cast<int>(coupling.price.size()) < nt) {
    throw IncompatibleGrids("lagrangian_pushforward", "price path shorter than the grid");
  }
  ParticleMeasure eta(kappa.grid, MeasureKind::kStateControl);
  eta.particles = kappa.particles;
  const long count = static_cast<long>(kappa.size());
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](long i) {
    try {
      auto path = std::make_shared<AgentTrajectory>(*kappa.particles[i].path);
      for (int k = 0; k < nt; ++k) {
        const Vec& x = path->gamma[k];
        const Vec r = coupling.price[k] + model.input(x).transpose() * path->p[k + 1];
        const std::span<const int> warm =
            static_cast<int>(path->active.size()) == nt ? std::span<const int>(path->active[k])
                                                        : std::span<const int>();
        KktPoint kkt = hamiltonian_min(model, x, r, kkt_tol, warm);
        path->v[k] = std::move(kkt.v);
        if (static_cast<int>(path->nu.size()) == nt) path->nu[k] = std::move(kkt.nu);
        if (static_cast<int>(path->active.size()) == nt) path->active[k] = std::move(kkt.active_set);
      }
      eta.particles[i].path = std::move(path);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (policy == ExecutionPolicy::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) work(i);
  } else {
    for (long i = 0; i < count; ++i) work(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return eta;
}

}  // namespace mfgc
