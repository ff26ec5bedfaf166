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

#include "mfgc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

#include "mfgc/error.hpp"
#include "mfgc/pointwise.hpp"

namespace mfgc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Runs body(i) for i in [0, count), serially or with OpenMP, and rethrows
// the first exception in index order.
template <typename Body>
void for_each_index(long count, ExecutionPolicy policy, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](long i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (policy == ExecutionPolicy::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) guarded(i);
  } else {
    for (long i = 0; i < count; ++i) guarded(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Heaviest particle of every atom (index = atom id; -1 when absent).
std::vector<int> heaviest_per_atom(const ParticleMeasure& m) {
  std::vector<int> best;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const int a = m.particles[i].atom;
    if (static_cast<std::size_t>(a) >= best.size()) best.resize(a + 1, -1);
    if (best[a] < 0 || m.particles[i].weight > m.particles[best[a]].weight) {
      best[a] = static_cast<int>(i);
    }
  }
  return best;
}

ParticleMeasure as_state_control(const ParticleMeasure& kappa) {
  ParticleMeasure eta(kappa.grid, MeasureKind::kStateControl);
  eta.particles = kappa.particles;
  return eta;
}

double sup_price_gap(const CouplingSignals& a, const CouplingSignals& b) {
  double gap = 0.0;
  const std::size_t n = std::min(a.price.size(), b.price.size());
  for (std::size_t k = 0; k < n; ++k) gap = std::max(gap, (a.price[k] - b.price[k]).norm());
  return gap;
}

Vec mean_control(const ParticleMeasure& eta, int k) {
  Vec mean = Vec::Zero(eta.particles.front().path->v[k].size());
  for (const Particle& p : eta.particles) mean += p.weight * p.path->v[k];
  return mean;
}

double measure_pairing(const MeanFieldTerm& phi, const DiscreteMeasure& m1,
                       const DiscreteMeasure& m2) {
  double value = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    value += m1.weights()[i] * (phi(m1.points()[i], m1) - phi(m1.points()[i], m2));
  }
  for (std::size_t j = 0; j < m2.size(); ++j) {
    value -= m2.weights()[j] * (phi(m2.points()[j], m1) - phi(m2.points()[j], m2));
  }
  return value;
}

void merge_residual(PmpResidual& into, const PmpResidual& r) {
  into.adjoint_residual = std::max(into.adjoint_residual, r.adjoint_residual);
  if (r.stationarity_residual > into.stationarity_residual) {
    into.stationarity_residual = r.stationarity_residual;
    into.worst_stationarity_node = r.worst_stationarity_node;
  }
  into.complementarity_residual =
      std::max(into.complementarity_residual, r.complementarity_residual);
  into.terminal_residual = std::max(into.terminal_residual, r.terminal_residual);
  into.transversality_residual =
      std::max(into.transversality_residual, r.transversality_residual);
  into.dynamics_residual = std::max(into.dynamics_residual, r.dynamics_residual);
}

}  // namespace

double SolveConfig::weight(int k) const {
  // The initial measure is only a seed, so the first best response replaces
  // it; afterwards the schedule is omega or 1/(j+1) with j = k - 1 counted
  // from zero.
  if (k <= 1) return 1.0;
  return schedule == DampingSchedule::kConstant ? omega : 1.0 / k;
}

void SolveConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw ModelError("SolveConfig", field + ": " + what);
  };
  if (!(horizon > 0.0)) fail("grid.horizon", "must be > 0");
  if (nt < 1) fail("grid.nt", "must be >= 1");
  if (!(omega > 0.0 && omega <= 1.0)) fail("solver.omega", "must lie in (0, 1]");
  if (support_cap < 1) fail("solver.support_cap", "must be >= 1");
  if (!(price_tol > 0.0)) fail("solver.price_tol", "must be > 0");
  if (!(agent_tol > 0.0)) fail("solver.agent_tol", "must be > 0");
  if (!(exploitability_tol > 0.0)) fail("solver.exploitability_tol", "must be > 0");
  if (max_iter < 1) fail("solver.max_iter", "must be >= 1");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

ParticleMeasure initial_measure(const ModelSpec& model, const DiscreteMeasure& atoms,
                                const TimeGrid& grid, std::uint64_t seed) {
  ParticleMeasure kappa(grid, MeasureKind::kStateCostate);
  std::mt19937_64 rng(seed);
  const int n = model.dims.n_state;
  const Vec zero_price = Vec::Zero(model.dims.n_control);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    Vec costate = Vec::Zero(n);
    if (seed != 0) {
      for (int i = 0; i < n; ++i) costate(i) = 2.0 * uniform01(rng) - 1.0;
    }
    auto t = std::make_shared<AgentTrajectory>();
    t->x0 = atoms.points()[a];
    t->p.assign(grid.nodes(), costate);
    t->nu.resize(grid.nt);
    t->active.resize(grid.nt);
    t->lambda1 = Vec::Zero(model.dims.n_g1);
    t->lambda2 = Vec::Zero(model.dims.n_g2);
    int k = 0;
    t->gamma = integrate_feedback(
        model, t->x0,
        [&](int node, const Vec& x) {
          k = node;
          const Vec r = zero_price + model.input(x).transpose() * costate;
          KktPoint kkt = hamiltonian_min(model, x, r, 1e-12);
          t->nu[k] = kkt.nu;
          t->active[k] = kkt.active_set;
          return kkt.v;
        },
        grid, &t->v);
    kappa.particles.push_back({t, atoms.weights()[a], static_cast<int>(a)});
  }
  return kappa;
}

CouplingSignals induced_coupling(const ModelSpec& model, const ParticleMeasure& kappa,
                                 const PriceOptions& options, ExecutionPolicy policy) {
  const int nodes = kappa.grid.nodes();
  CouplingSignals c;
  c.price.resize(nodes);
  c.marginals.resize(nodes);
  for_each_index(nodes, policy, [&](long k) {
    c.price[k] = price_fixed_point(model, price_snapshot(kappa, static_cast<int>(k)), options)
                     .price;
    c.marginals[k] = marginal_state(kappa, static_cast<int>(k));
  });
  c.validate(model.price_bound, 1e-9);
  return c;
}

ParticleMeasure BestResponse::measure(const TimeGrid& grid) const {
  ParticleMeasure m(grid, MeasureKind::kStateCostate);
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (agents[a] && atom_weights[a] > 0.0) {
      m.particles.push_back({agents[a], atom_weights[a], static_cast<int>(a)});
    }
  }
  return m;
}

BestResponse best_response(const ModelSpec& model, const ParticleMeasure& kappa,
                           const AgentOptions& agent, ExecutionPolicy policy,
                           const std::vector<std::shared_ptr<const AgentTrajectory>>* warm,
                           const PriceOptions& price) {
  kappa.validate();
  if (kappa.kind != MeasureKind::kStateCostate) {
    throw WrongKind("best_response", "requires a state-costate measure");
  }
  BestResponse out;
  out.coupling = induced_coupling(model, kappa, price, policy);
  out.atom_weights = kappa.atom_mass();
  const std::vector<int> heaviest = heaviest_per_atom(kappa);
  const long atoms = static_cast<long>(out.atom_weights.size());
  out.agents.assign(atoms, nullptr);
  std::vector<std::string> errors(atoms);
  const TimeGrid& grid = kappa.grid;
  for_each_index(atoms, policy, [&](long a) {
    if (heaviest[a] < 0) return;
    const AgentTrajectory& own = *kappa.particles[heaviest[a]].path;
    const AgentTrajectory* seed = &own;
    if (warm && static_cast<std::size_t>(a) < warm->size() && (*warm)[a]) {
      seed = (*warm)[a].get();
    }
    try {
      out.agents[a] = std::make_shared<AgentTrajectory>(
          solve_agent(model, own.x0, out.coupling, grid, agent, seed));
    } catch (const Error& e) {
      errors[a] = e.what();
      out.agents[a] = kappa.particles[heaviest[a]].path;
    }
  });
  for (long a = 0; a < atoms; ++a) {
    if (errors[a].empty()) continue;
    if (out.failures == 0) {
      out.failure_message = "atom " + std::to_string(a) + ": " + errors[a];
    }
    ++out.failures;
  }
  if (out.failures * 10 > atoms) {
    std::ostringstream msg;
    msg << out.failures << " of " << atoms << " agent solves failed; first: "
        << out.failure_message;
    throw NoConvergence("best_response", msg.str(), static_cast<double>(out.failures));
  }
  return out;
}

double exploitability(const ModelSpec& model, const ParticleMeasure& eta,
                      const CouplingSignals& coupling, const AgentOptions& agent,
                      const std::vector<double>* optimal_cost, ExecutionPolicy policy) {
  if (eta.kind != MeasureKind::kStateControl) {
    throw WrongKind("exploitability", "requires a state-control measure");
  }
  const TimeGrid& grid = eta.grid;
  std::vector<double> best;
  if (optimal_cost) {
    best = *optimal_cost;
  } else {
    const std::vector<int> heaviest = heaviest_per_atom(eta);
    best.assign(heaviest.size(), 0.0);
    for_each_index(static_cast<long>(heaviest.size()), policy, [&](long a) {
      if (heaviest[a] < 0) return;
      const AgentTrajectory& own = *eta.particles[heaviest[a]].path;
      best[a] = solve_agent(model, own.x0, coupling, grid, agent, &own).cost;
    });
  }
  double value = 0.0;
  for (const Particle& p : eta.particles) {
    if (static_cast<std::size_t>(p.atom) >= best.size()) {
      throw SizeMismatch("exploitability", "missing optimal cost for an atom");
    }
    const double cost = cost_eval(model, p.path->gamma, p.path->v, coupling, grid);
    value += p.weight * (cost - best[p.atom]);
  }
  return value;
}

double price_consistency(const ModelSpec& model, const ParticleMeasure& eta,
                         const CouplingSignals& coupling) {
  if (eta.kind != MeasureKind::kStateControl) {
    throw WrongKind("price_consistency", "requires a state-control measure");
  }
  double worst = 0.0;
  for (int k = 0; k < eta.grid.nt; ++k) {
    worst = std::max(worst, (coupling.price.at(k) - model.price(mean_control(eta, k))).norm());
  }
  return worst;
}

double monotonicity_probe(const MeanFieldTerm& phi,
                          const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& pairs) {
  double worst = kInf;
  for (const auto& [m1, m2] : pairs) worst = std::min(worst, measure_pairing(phi, m1, m2));
  return pairs.empty() ? 0.0 : worst;
}

std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> random_measure_pairs(
    const ModelSpec& model, int count, int points_per_measure, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec& lo = model.probes.x_lower;
  const Vec& hi = model.probes.x_upper;
  auto draw = [&]() {
    std::vector<Vec> pts;
    std::vector<double> w;
    double total = 0.0;
    for (int i = 0; i < points_per_measure; ++i) {
      Vec x(lo.size());
      for (Eigen::Index j = 0; j < lo.size(); ++j) {
        x(j) = lo(j) + (hi(j) - lo(j)) * uniform01(rng);
      }
      pts.push_back(std::move(x));
      w.push_back(0.1 + uniform01(rng));
      total += w.back();
    }
    for (double& x : w) x /= total;
    return DiscreteMeasure(std::move(pts), std::move(w));
  };
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
  for (int i = 0; i < count; ++i) {
    DiscreteMeasure a = draw();
    DiscreteMeasure b = draw();
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return pairs;
}

double potential_convexity_probe(const ModelSpec& model, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int m = model.dims.n_control;
  const double r = model.probes.control_radius;
  double worst = kInf;
  for (int i = 0; i < count; ++i) {
    Vec a(m), b(m);
    for (int j = 0; j < m; ++j) {
      a(j) = r * (2.0 * uniform01(rng) - 1.0);
      b(j) = r * (2.0 * uniform01(rng) - 1.0);
    }
    const double d2 = (a - b).squaredNorm();
    if (d2 < 1e-8) continue;
    const double gap =
        0.5 * (model.potential(a) + model.potential(b)) - model.potential(0.5 * (a + b));
    worst = std::min(worst, gap / d2);
  }
  return worst;
}

MonotonicityTerms monotonicity_terms(const ModelSpec& model, const ParticleMeasure& eta1,
                                     const CouplingSignals& c1, const ParticleMeasure& eta2,
                                     const CouplingSignals& c2) {
  if (!(eta1.grid == eta2.grid)) {
    throw IncompatibleGrids("monotonicity_terms", "time grids differ");
  }
  const TimeGrid& grid = eta1.grid;
  MonotonicityTerms t;
  for (int k = 0; k < grid.nt; ++k) {
    t.price += grid.dt() * (c2.price.at(k) - c1.price.at(k))
                               .dot(mean_control(eta1, k) - mean_control(eta2, k));
    t.running += grid.dt() * measure_pairing(model.congestion, marginal_state(eta1, k),
                                             marginal_state(eta2, k));
  }
  t.terminal = measure_pairing(model.terminal_cost, marginal_state(eta1, grid.nt),
                               marginal_state(eta2, grid.nt));
  return t;
}

EquilibriumReport solve_equilibrium(const ModelSpec& model, const SolveConfig& config) {
  config.validate();
  model.dims.validate();
  EquilibriumReport report;
  report.grid = config.grid();
  report.atoms = sample_initial(config.m0);
  const TimeGrid& grid = report.grid;

  AgentOptions agent;
  agent.tol = config.agent_tol;
  PriceOptions price;
  price.tol = std::min(1e-10, 1e-2 * config.price_tol);

  ParticleMeasure kappa = initial_measure(model, report.atoms, grid, config.seed);
  std::vector<std::shared_ptr<const AgentTrajectory>> warm;
  std::optional<CouplingSignals> previous;

  struct Iterate {
    ParticleMeasure kappa;
    BestResponse br;
    double exploitability;
    double mean_cost;
    double score;
  };
  std::optional<Iterate> best;

  for (int it = 1; it <= config.max_iter; ++it) {
    BestResponse br;
    try {
      br = best_response(model, kappa, agent, config.policy, warm.empty() ? nullptr : &warm,
                         price);
    } catch (const Error& e) {
      report.status = SolveStatus::kFailed;
      report.message = e.what();
      break;
    }
    std::vector<double> optimal(br.agents.size(), 0.0);
    double mean_cost = 0.0;
    for (std::size_t a = 0; a < br.agents.size(); ++a) {
      if (!br.agents[a]) continue;
      optimal[a] = br.agents[a]->cost;
      mean_cost += br.atom_weights[a] * optimal[a];
    }
    const double exploit = exploitability(model, as_state_control(kappa), br.coupling, agent,
                                          &optimal, config.policy);
    IterationRecord rec;
    rec.iteration = it;
    if (previous) {
      rec.price_change = sup_price_gap(br.coupling, *previous);
    } else {
      for (const Vec& p : br.coupling.price) rec.price_change = std::max(rec.price_change, p.norm());
    }
    rec.exploitability = exploit;
    rec.mean_cost = mean_cost;
    std::vector<const AgentTrajectory*> paths;
    for (const Particle& p : kappa.particles) paths.push_back(p.path.get());
    rec.bounds = bounds_report(paths, grid);
    rec.support = static_cast<int>(kappa.size());

    const double exploit_limit = config.exploitability_tol * (1.0 + std::abs(mean_cost));
    const double score = std::max(rec.price_change / config.price_tol, exploit / exploit_limit);
    const bool converged = rec.price_change <= config.price_tol && exploit <= exploit_limit;
    if (!best || score <= best->score) best = Iterate{kappa, br, exploit, mean_cost, score};
    report.iterations = it;
    if (converged) {
      report.trace.push_back(rec);
      report.status = SolveStatus::kConverged;
      best = Iterate{kappa, br, exploit, mean_cost, score};
      break;
    }
    const ParticleMeasure responses = br.measure(grid);
    const double w = config.weight(it);
    MixtureResult next = mixture({&kappa, &responses}, {1.0 - w, w}, config.support_cap,
                                 CapScope::kPerAtom, true);
    for (int k = 0; k < grid.nodes(); ++k) {
      rec.marginal_d1_change =
          std::max(rec.marginal_d1_change,
                   wasserstein1(marginal_state(next.measure, k), marginal_state(kappa, k)).value);
    }
    rec.dropped_mass = next.dropped_mass;
    report.trace.push_back(rec);
    previous = br.coupling;
    warm = br.agents;
    kappa = std::move(next.measure);
    if (it == config.max_iter) report.status = SolveStatus::kMaxIter;
  }

  if (!best) {
    if (report.message.empty()) report.message = "no iterate completed";
    return report;
  }
  if (report.status == SolveStatus::kMaxIter) {
    report.message = "maximum outer iterations reached; best iterate reported";
  }
  report.kappa = best->kappa;
  report.responses = best->br;
  report.coupling = best->br.coupling;
  report.mean_cost = best->mean_cost;
  report.eta = lagrangian_pushforward(*report.kappa, report.coupling, model, 1e-12,
                                      config.policy);
  Certificate& cert = report.certificate;
  cert.exploitability = best->exploitability;
  cert.price_consistency = price_consistency(model, *report.eta, report.coupling);
  for (const auto& agent_path : report.responses.agents) {
    if (agent_path) merge_residual(cert.pmp, pmp_residual(model, *agent_path, report.coupling, grid));
  }
  for (const Particle& p : report.eta->particles) {
    cert.eta_stationarity =
        std::max(cert.eta_stationarity,
                 pmp_residual(model, *p.path, report.coupling, grid).stationarity_residual);
  }
  return report;
}

UniquenessReport uniqueness_experiment(const ModelSpec& model, const SolveConfig& config,
                                       int n_starts) {
  if (n_starts < 2) throw ModelError("uniqueness_experiment", "n_starts must be >= 2");
  UniquenessReport out;
  const auto pairs = random_measure_pairs(model, 200, 8, config.seed + 7919);
  out.congestion_monotonicity = monotonicity_probe(model.congestion, pairs);
  out.terminal_monotonicity = monotonicity_probe(model.terminal_cost, pairs);
  out.potential_convexity = potential_convexity_probe(model, 200, config.seed + 104729);
  out.preconditions_ok = out.congestion_monotonicity >= -1e-10 &&
                         out.terminal_monotonicity >= -1e-10 && out.potential_convexity > 0.0;
  for (int s = 0; s < n_starts; ++s) {
    SolveConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(s);
    out.seeds.push_back(c.seed);
    out.runs.push_back(solve_equilibrium(model, c));
    out.statuses.push_back(out.runs.back().status);
    out.mean_costs.push_back(out.runs.back().mean_cost);
  }
  for (int i = 0; i < n_starts; ++i) {
    for (int j = i + 1; j < n_starts; ++j) {
      const EquilibriumReport& a = out.runs[i];
      const EquilibriumReport& b = out.runs[j];
      if (!a.eta || !b.eta) continue;
      out.price_gap = std::max(out.price_gap, sup_price_gap(a.coupling, b.coupling));
      out.mean_cost_gap = std::max(out.mean_cost_gap, std::abs(a.mean_cost - b.mean_cost));
      const std::size_t atoms = std::min(a.responses.agents.size(), b.responses.agents.size());
      for (std::size_t k = 0; k < atoms; ++k) {
        if (a.responses.agents[k] && b.responses.agents[k]) {
          out.cost_gap = std::max(out.cost_gap, std::abs(a.responses.agents[k]->cost -
                                                         b.responses.agents[k]->cost));
        }
      }
      const MonotonicityTerms t = monotonicity_terms(model, *a.eta, a.coupling, *b.eta, b.coupling);
      out.max_term = std::max({out.max_term, std::abs(t.price), std::abs(t.terminal),
                               std::abs(t.running)});
    }
  }
  return out;
}

}  // namespace mfgc
