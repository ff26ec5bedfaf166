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

#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "mfgc/equilibrium.hpp"
#include "mfgc/error.hpp"
#include "mfgc/execution.hpp"
#include "mfgc/io.hpp"
#include "mfgc/measures.hpp"

namespace mfgc::cli {

namespace {

std::string num(double x) { return format_double(x); }

void print_entries(const ReportEntries& entries) {
  for (const auto& [key, value] : entries) std::cout << key << '=' << value << '\n';
}

void echo_config(const RunConfig& config) {
  std::cerr << "# configuration\n";
  std::istringstream lines(config.echo());
  std::string line;
  while (std::getline(lines, line)) std::cerr << "#   " << line << '\n';
}

void append_residual(ReportEntries& e, const std::string& prefix, const PmpResidual& r) {
  e.emplace_back(prefix + "adjoint", num(r.adjoint_residual));
  e.emplace_back(prefix + "stationarity", num(r.stationarity_residual));
  e.emplace_back(prefix + "complementarity", num(r.complementarity_residual));
  e.emplace_back(prefix + "terminal", num(r.terminal_residual));
  e.emplace_back(prefix + "transversality", num(r.transversality_residual));
  e.emplace_back(prefix + "dynamics", num(r.dynamics_residual));
}

int status_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return kExitConverged;
    case SolveStatus::kMaxIter:
      return kExitNotConverged;
    case SolveStatus::kFailed:
      return kExitFailure;
  }
  return kExitFailure;
}

ReportEntries summarize(const ModelSpec& model, const EquilibriumReport& r) {
  ReportEntries e;
  e.emplace_back("status", to_string(r.status));
  e.emplace_back("message", r.message);
  e.emplace_back("iterations", std::to_string(r.iterations));
  e.emplace_back("atoms", std::to_string(r.atoms.size()));
  if (!r.kappa) return e;
  e.emplace_back("support", std::to_string(r.kappa->size()));
  e.emplace_back("mean_cost", num(r.mean_cost));
  e.emplace_back("exploitability", num(r.certificate.exploitability));
  e.emplace_back("price_consistency", num(r.certificate.price_consistency));
  append_residual(e, "pmp.", r.certificate.pmp);
  e.emplace_back("pmp.eta_stationarity", num(r.certificate.eta_stationarity));
  e.emplace_back("failed_agents", std::to_string(r.responses.failures));
  double price_sup = 0.0;
  for (const Vec& p : r.coupling.price) price_sup = std::max(price_sup, p.norm());
  e.emplace_back("price_sup", num(price_sup));
  e.emplace_back("price_bound", num(model.price_bound));
  std::vector<const AgentTrajectory*> paths;
  for (const Particle& p : r.kappa->particles) paths.push_back(p.path.get());
  const TrajectoryBounds b = bounds_report(paths, r.grid);
  e.emplace_back("bounds.state", num(b.state));
  e.emplace_back("bounds.costate", num(b.costate));
  e.emplace_back("bounds.state_rate", num(b.state_rate));
  e.emplace_back("bounds.costate_rate", num(b.costate_rate));
  const HolderResult h = holder_check(*r.kappa, b.state_rate, b.costate_rate);
  e.emplace_back("holder.worst_ratio", num(h.worst_ratio));
  e.emplace_back("holder.bound", num(h.bound));
  e.emplace_back("holder.holds", h.holds ? "true" : "false");
  return e;
}

void write_outputs(const RunConfig& config, const ModelSpec& model, const EquilibriumReport& r,
                   const ReportEntries& summary) {
  const std::filesystem::path dir(config.output.directory);
  std::filesystem::create_directories(dir);
  if (r.kappa) {
    if (config.output.price) write_price_csv((dir / "price.csv").string(), r.grid, r.coupling);
    if (config.output.trajectories) {
      write_trajectories_csv((dir / "trajectories.csv").string(), r.grid, r.responses.agents,
                             model.dims.n_control, model.dims.n_c);
    }
  }
  if (r.kappa && config.output.marginals) {
    write_marginals_csv((dir / "marginals.csv").string(), r.grid, r.coupling.marginals);
  }
  if (config.output.convergence) {
    write_convergence_csv((dir / "convergence.csv").string(), r.trace);
  }
  if (config.output.report) {
    ReportEntries all = summary;
    for (const auto& [key, value] : config.entries()) all.emplace_back("config." + key, value);
    write_report((dir / "report.txt").string(), all);
  }
}

}  // namespace

int resolve_threads(std::optional<int> flag, int config_threads) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MFGC_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 0) return t;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid MFGC_THREADS='" << env << "'\n";
  }
  return config_threads;
}

int run_solve(const RunConfig& config, int threads) {
  set_threads(threads);
  echo_config(config);
  const ModelSpec model = build_model(config);
  SolveConfig solve = config.solve;
  solve.policy = ExecutionPolicy::kParallel;
  const EquilibriumReport report = solve_equilibrium(model, solve);
  const ReportEntries summary = summarize(model, report);
  write_outputs(config, model, report, summary);
  print_entries(summary);
  if (report.status == SolveStatus::kFailed) {
    std::cerr << "error: " << report.message << '\n';
  }
  return status_code(report.status);
}

int run_check(const RunConfig& config, const CheckOptions& options) {
  const ModelSpec model = build_model(config);
  ReportEntries e;
  const AssumptionReport assumptions = validate_assumptions(model, options.probes, 1e-6);
  for (const AssumptionCheck& c : assumptions.checks) {
    const char* status = c.status == AssumptionCheck::Status::kPassed    ? "passed"
                         : c.status == AssumptionCheck::Status::kViolated ? "violated"
                                                                          : "skipped";
    e.emplace_back("assumption." + c.name, std::string(status) + " worst=" + num(c.worst_violation));
  }

  const TrajectoryTable table = read_trajectories_csv(options.trajectories);
  const std::string price_path =
      options.price.empty()
          ? (std::filesystem::path(options.trajectories).parent_path() / "price.csv").string()
          : options.price;
  const PriceTable prices = read_price_csv(price_path);
  std::string marginals_path = options.marginals;
  if (marginals_path.empty()) {
    const auto beside =
        std::filesystem::path(options.trajectories).parent_path() / "marginals.csv";
    if (std::filesystem::exists(beside)) marginals_path = beside.string();
  }
  const TimeGrid grid = config.solve.grid();
  if (static_cast<int>(table.t.size()) != grid.nodes() ||
      static_cast<int>(prices.price.size()) != grid.nodes()) {
    throw IncompatibleGrids("check", "files do not match grid.nt = " + std::to_string(grid.nt));
  }
  for (int k = 0; k < grid.nodes(); ++k) {
    if (std::abs(table.t[k] - grid.t(k)) > 1e-9 * (1.0 + grid.horizon) ||
        std::abs(prices.t[k] - grid.t(k)) > 1e-9 * (1.0 + grid.horizon)) {
      throw IncompatibleGrids("check", "node times do not match the configured grid");
    }
  }
  // Agent weights: the initial distribution's atoms when they line up,
  // uniform otherwise.
  const std::size_t count = table.agents.size();
  std::vector<double> weights(count, 1.0 / static_cast<double>(count));
  const DiscreteMeasure atoms = sample_initial(config.solve.m0);
  if (atoms.size() == count) {
    bool aligned = true;
    for (std::size_t i = 0; i < count; ++i) {
      const int id = table.agent_ids[i];
      aligned = aligned && id >= 0 && static_cast<std::size_t>(id) < count &&
                (atoms.points()[id] - table.agents[i].x0).norm() <= 1e-12;
    }
    if (aligned) {
      for (std::size_t i = 0; i < count; ++i) weights[i] = atoms.weights()[table.agent_ids[i]];
    }
  }
  CouplingSignals coupling;
  coupling.price = prices.price;
  if (!marginals_path.empty()) {
    coupling.marginals = read_marginals_csv(marginals_path);
    if (static_cast<int>(coupling.marginals.size()) != grid.nodes()) {
      throw IncompatibleGrids("check", "marginals file does not match the grid");
    }
  } else {
    // Without exported marginals, m_t is rebuilt from the agents themselves.
    for (int k = 0; k < grid.nodes(); ++k) {
      std::vector<Vec> pts;
      for (const AgentTrajectory& a : table.agents) pts.push_back(a.gamma[k]);
      coupling.marginals.emplace_back(std::move(pts), weights);
    }
  }
  // Terminal multipliers are recovered from the terminal costate by least squares.
  const int q1 = model.dims.n_g1, q2 = model.dims.n_g2;
  PmpResidual worst;
  int worst_agent = -1;
  double worst_value = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    AgentTrajectory a = table.agents[i];
    const Vec& xT = a.gamma.back();
    a.lambda1 = Vec::Zero(q1);
    a.lambda2 = Vec::Zero(q2);
    if (q1 + q2 > 0) {
      Mat A(model.dims.n_state, q1 + q2);
      if (q1 > 0) A.leftCols(q1) = model.terminal_eq_dx(xT).transpose();
      if (q2 > 0) A.rightCols(q2) = model.terminal_ineq_dx(xT).transpose();
      const Vec rhs = a.p.back() - model.terminal_cost_dx(xT, coupling.marginals.back());
      const Vec lambda = A.completeOrthogonalDecomposition().solve(rhs);
      a.lambda1 = lambda.head(q1);
      a.lambda2 = lambda.tail(q2);
    }
    const PmpResidual r = pmp_residual(model, a, coupling, grid);
    if (r.max() > worst_value) {
      worst_value = r.max();
      worst_agent = table.agent_ids[i];
    }
    worst.adjoint_residual = std::max(worst.adjoint_residual, r.adjoint_residual);
    if (r.stationarity_residual > worst.stationarity_residual) {
      worst.stationarity_residual = r.stationarity_residual;
      worst.worst_stationarity_node = r.worst_stationarity_node;
    }
    worst.complementarity_residual =
        std::max(worst.complementarity_residual, r.complementarity_residual);
    worst.terminal_residual = std::max(worst.terminal_residual, r.terminal_residual);
    worst.transversality_residual =
        std::max(worst.transversality_residual, r.transversality_residual);
    worst.dynamics_residual = std::max(worst.dynamics_residual, r.dynamics_residual);
  }
  e.emplace_back("agents", std::to_string(count));
  e.emplace_back("marginals", marginals_path.empty() ? "agents" : marginals_path);
  append_residual(e, "pmp.", worst);
  e.emplace_back("pmp.worst_agent", std::to_string(worst_agent));
  e.emplace_back("pmp.worst_stationarity_node", std::to_string(worst.worst_stationarity_node));
  e.emplace_back("tolerance", num(options.tol));
  const bool certified = worst.max() <= options.tol;
  e.emplace_back("certified", certified ? "true" : "false");
  print_entries(e);
  return certified ? kExitConverged : kExitNotConverged;
}

int run_uniqueness(const RunConfig& config, int starts, int threads) {
  set_threads(threads);
  echo_config(config);
  const ModelSpec model = build_model(config);
  SolveConfig solve = config.solve;
  solve.policy = ExecutionPolicy::kParallel;
  const UniquenessReport u = uniqueness_experiment(model, solve, starts);
  ReportEntries e;
  e.emplace_back("starts", std::to_string(starts));
  e.emplace_back("preconditions_ok", u.preconditions_ok ? "true" : "false");
  e.emplace_back("congestion_monotonicity", num(u.congestion_monotonicity));
  e.emplace_back("terminal_monotonicity", num(u.terminal_monotonicity));
  e.emplace_back("potential_convexity", num(u.potential_convexity));
  int code = kExitConverged;
  for (std::size_t i = 0; i < u.runs.size(); ++i) {
    const std::string prefix = "run." + std::to_string(i) + ".";
    e.emplace_back(prefix + "seed", std::to_string(u.seeds[i]));
    e.emplace_back(prefix + "status", to_string(u.statuses[i]));
    e.emplace_back(prefix + "iterations", std::to_string(u.runs[i].iterations));
    e.emplace_back(prefix + "mean_cost", num(u.mean_costs[i]));
    e.emplace_back(prefix + "exploitability", num(u.runs[i].certificate.exploitability));
    code = std::max(code, status_code(u.statuses[i]) == kExitFailure ? 3 : status_code(u.statuses[i]));
  }
  e.emplace_back("price_gap", num(u.price_gap));
  e.emplace_back("cost_gap", num(u.cost_gap));
  e.emplace_back("mean_cost_gap", num(u.mean_cost_gap));
  e.emplace_back("max_monotonicity_term", num(u.max_term));
  if (!u.preconditions_ok) {
    e.emplace_back("warning", "monotonicity or strict convexity precondition violated on samples");
  }
  print_entries(e);
  const std::filesystem::path dir(config.output.directory);
  std::filesystem::create_directories(dir);
  write_report((dir / "uniqueness.txt").string(), e);
  return code == 3 ? kExitFailure : code;
}

int run_gas_demo(const GasDemoOverrides& overrides, int threads) {
  RunConfig config = gas_demo_config();
  if (overrides.epsilon) config.model.gas.epsilon = *overrides.epsilon;
  if (overrides.agents) config.solve.m0.count = *overrides.agents;
  if (overrides.nt) config.solve.nt = *overrides.nt;
  if (overrides.out) config.output.directory = *overrides.out;
  if (config.solve.m0.count < 1) throw ValidationError("--agents", "must be >= 1");
  if (config.solve.nt < 1) throw ValidationError("--nt", "must be >= 1");
  return run_solve(config, threads);
}

}  // namespace mfgc::cli
