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

#include "mfgc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "mfgc/error.hpp"

namespace mfgc {

TimeGrid::TimeGrid(double horizon_, int nt_) : horizon(horizon_), nt(nt_) {
  if (nt < 1) throw ModelError("TimeGrid", "nt must be >= 1");
  if (!(horizon > 0.0)) throw ModelError("TimeGrid", "horizon must be > 0");
}

CouplingSignals CouplingSignals::constant(const TimeGrid& grid, const Vec& price,
                                          int n_state) {
  CouplingSignals c;
  c.price.assign(grid.nodes(), price);
  c.marginals.assign(grid.nodes(), DiscreteMeasure(n_state));
  return c;
}

void CouplingSignals::validate(double bound, double slack) const {
  for (std::size_t k = 0; k < price.size(); ++k) {
    if (price[k].norm() > bound + slack) {
      std::ostringstream msg;
      msg << "|P| = " << price[k].norm() << " exceeds sup|psi| = " << bound
          << " at node " << k;
      throw ModelError("CouplingSignals", msg.str());
    }
  }
  for (const auto& m : marginals) {
    if (m.empty()) continue;
    double total = 0.0;
    for (double w : m.weights()) total += w;
    if (std::abs(total - 1.0) > 1e-12) {
      throw ModelError("CouplingSignals", "marginal weights do not sum to one");
    }
  }
}

double PmpResidual::max() const {
  return std::max({adjoint_residual, stationarity_residual, complementarity_residual,
                   terminal_residual, transversality_residual, dynamics_residual});
}

namespace {

const DiscreteMeasure& marginal_at(const CouplingSignals& coupling, int k,
                                   const DiscreteMeasure& fallback) {
  if (static_cast<std::size_t>(k) < coupling.marginals.size()) {
    return coupling.marginals[k];
  }
  return fallback;
}

const Vec& price_at(const CouplingSignals& coupling, int k) {
  if (static_cast<std::size_t>(k) >= coupling.price.size()) {
    throw IncompatibleGrids("CouplingSignals", "price path shorter than the grid");
  }
  return coupling.price[k];
}

Vec euler_step(const ModelSpec& model, const Vec& x, const Vec& v, double dt) {
  return x + dt * (model.drift(x) + model.input(x) * v);
}

void require_finite(const Vec& x, const char* op, int k) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite value at node " << k;
    throw NonFinite(op, msg.str());
  }
}

// Right-hand side of the discrete adjoint, D_x H at interval k.
Vec adjoint_rhs(const ModelSpec& model, const Vec& x, const Vec& v, const Vec& nu,
                const Vec& p_next, const DiscreteMeasure& m_k) {
  Mat A = model.drift_dx(x);
  const std::vector<Mat> db = model.input_dx(x);
  for (Eigen::Index i = 0; i < v.size(); ++i) A += db.at(i) * v(i);
  Vec rhs = model.running_cost_dx(x, v) + model.congestion_dx(x, m_k) +
            A.transpose() * p_next;
  if (model.dims.n_c > 0) rhs += model.mixed_dx(x, v).transpose() * nu;
  return rhs;
}

}  // namespace

std::vector<Vec> integrate_state(const ModelSpec& model, const Vec& x0,
                                 const std::vector<Vec>& v_path, const TimeGrid& grid) {
  if (static_cast<int>(v_path.size()) < grid.nt) {
    throw IncompatibleGrids("integrate_state", "control path shorter than the grid");
  }
  std::vector<Vec> gamma;
  gamma.reserve(grid.nodes());
  gamma.push_back(x0);
  for (int k = 0; k < grid.nt; ++k) {
    gamma.push_back(euler_step(model, gamma.back(), v_path[k], grid.dt()));
    require_finite(gamma.back(), "integrate_state", k + 1);
  }
  return gamma;
}

std::vector<Vec> integrate_feedback(const ModelSpec& model, const Vec& x0,
                                    const FeedbackPolicy& policy, const TimeGrid& grid,
                                    std::vector<Vec>* v_out) {
  std::vector<Vec> gamma;
  gamma.reserve(grid.nodes());
  gamma.push_back(x0);
  if (v_out) v_out->clear();
  for (int k = 0; k < grid.nt; ++k) {
    const Vec v = policy(k, gamma.back());
    gamma.push_back(euler_step(model, gamma.back(), v, grid.dt()));
    require_finite(gamma.back(), "integrate_feedback", k + 1);
    if (v_out) v_out->push_back(v);
  }
  return gamma;
}

std::vector<Vec> integrate_costate(const ModelSpec& model, const std::vector<Vec>& gamma,
                                   const std::vector<Vec>& v_path,
                                   const std::vector<Vec>& nu_path, const Vec& p_terminal,
                                   const CouplingSignals& coupling, const TimeGrid& grid) {
  const int nt = grid.nt;
  if (static_cast<int>(gamma.size()) != nt + 1 || static_cast<int>(v_path.size()) < nt) {
    throw IncompatibleGrids("integrate_costate", "paths inconsistent with the grid");
  }
  const bool has_nu = model.dims.n_c > 0;
  if (has_nu && static_cast<int>(nu_path.size()) < nt) {
    throw IncompatibleGrids("integrate_costate", "multiplier path shorter than the grid");
  }
  const DiscreteMeasure empty(model.dims.n_state);
  const Vec no_nu;
  std::vector<Vec> p(nt + 1);
  p[nt] = p_terminal;
  for (int k = nt - 1; k >= 0; --k) {
    p[k] = p[k + 1] + grid.dt() * adjoint_rhs(model, gamma[k], v_path[k],
                                              has_nu ? nu_path[k] : no_nu, p[k + 1],
                                              marginal_at(coupling, k, empty));
    require_finite(p[k], "integrate_costate", k);
  }
  return p;
}

Vec terminal_costate(const ModelSpec& model, const Vec& gamma_T, const Vec& lambda1,
                     const Vec& lambda2, const DiscreteMeasure& m_T) {
  Vec p = model.terminal_cost_dx(gamma_T, m_T);
  if (model.dims.n_g1 > 0) p += model.terminal_eq_dx(gamma_T).transpose() * lambda1;
  if (model.dims.n_g2 > 0) p += model.terminal_ineq_dx(gamma_T).transpose() * lambda2;
  return p;
}

double cost_eval(const ModelSpec& model, const std::vector<Vec>& gamma,
                 const std::vector<Vec>& v_path, const CouplingSignals& coupling,
                 const TimeGrid& grid) {
  const int nt = grid.nt;
  const DiscreteMeasure empty(model.dims.n_state);
  double running = 0.0;
  for (int k = 0; k < nt; ++k) {
    running += model.running_cost(gamma[k], v_path[k]) + price_at(coupling, k).dot(v_path[k]) +
               model.congestion(gamma[k], marginal_at(coupling, k, empty));
  }
  return grid.dt() * running +
         model.terminal_cost(gamma[nt], marginal_at(coupling, nt, empty));
}

// ---------------------------------------------------------------------------
// Forward-backward sweep.

namespace {

struct Multipliers {
  Vec eq;
  Vec ineq;
};

struct SweepOutcome {
  AgentTrajectory traj;  // p is the costate used by the last forward sweep
  double change = std::numeric_limits<double>::infinity();
  bool converged = false;
  int sweeps = 0;
};

class SweepSolver {
 public:
  SweepSolver(const ModelSpec& model, const Vec& x0, const CouplingSignals& coupling,
              const TimeGrid& grid, const AgentOptions& opts)
      : model_(model),
        x0_(x0),
        coupling_(coupling),
        grid_(grid),
        opts_(opts),
        empty_(model.dims.n_state) {
    sweep_tol_ = opts.sweep_tol > 0.0 ? opts.sweep_tol : 1e-3 * opts.tol * grid.dt();
  }

  // Forward pass with the given costate: fills gamma, v, nu, active.
  void forward(AgentTrajectory& t) const {
    const int nt = grid_.nt;
    t.gamma.resize(nt + 1);
    t.v.resize(nt);
    t.nu.resize(nt);
    t.active.resize(nt);
    t.gamma[0] = x0_;
    for (int k = 0; k < nt; ++k) {
      const Vec& x = t.gamma[k];
      const Vec r = price_at(coupling_, k) + model_.input(x).transpose() * t.p[k + 1];
      KktPoint kkt = hamiltonian_min(model_, x, r, opts_.kkt_tol, t.active[k]);
      t.v[k] = std::move(kkt.v);
      t.nu[k] = std::move(kkt.nu);
      t.active[k] = std::move(kkt.active_set);
      t.gamma[k + 1] = euler_step(model_, x, t.v[k], grid_.dt());
      require_finite(t.gamma[k + 1], "solve_agent", k + 1);
    }
  }

  std::vector<Vec> backward(const AgentTrajectory& t, const Multipliers& lam) const {
    const Vec pT = terminal_costate(model_, t.gamma[grid_.nt], lam.eq, lam.ineq,
                                    marginal_at(coupling_, grid_.nt, empty_));
    return integrate_costate(model_, t.gamma, t.v, t.nu, pT, coupling_, grid_);
  }

  // Iterates sweeps at fixed terminal multipliers.
  SweepOutcome run(const Multipliers& lam, AgentTrajectory seed) const {
    SweepOutcome out;
    out.traj = std::move(seed);
    AgentTrajectory& t = out.traj;
    t.x0 = x0_;
    const int nt = grid_.nt;
    if (static_cast<int>(t.p.size()) != nt + 1) t.p.assign(nt + 1, Vec::Zero(model_.dims.n_state));
    if (static_cast<int>(t.active.size()) != nt) t.active.assign(nt, ActiveSet{});
    double beta = opts_.damping;
    double previous = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (int sweep = 0; sweep < opts_.max_sweeps; ++sweep) {
      forward(t);
      std::vector<Vec> p_new = backward(t, lam);
      double change = 0.0;
      for (int k = 0; k <= nt; ++k) {
        change = std::max(change, (p_new[k] - t.p[k]).lpNorm<Eigen::Infinity>());
      }
      out.change = change;
      out.sweeps = sweep + 1;
      if (change <= sweep_tol_) {
        out.converged = true;
        break;
      }
      growth = change > previous ? growth + 1 : 0;
      if (growth >= 3) {
        beta *= 0.5;
        growth = 0;
      }
      previous = change;
      for (int k = 0; k <= nt; ++k) t.p[k] = (1.0 - beta) * t.p[k] + beta * p_new[k];
    }
    t.lambda1 = lam.eq;
    t.lambda2 = lam.ineq;
    return out;
  }

  Vec terminal_violation(const AgentTrajectory& t, const Multipliers& lam) const {
    const int q1 = model_.dims.n_g1, q2 = model_.dims.n_g2;
    Vec F(q1 + q2);
    const Vec& xT = t.gamma[grid_.nt];
    if (q1 > 0) F.head(q1) = model_.terminal_eq(xT);
    if (q2 > 0) {
      const Vec g2 = model_.terminal_ineq(xT);
      for (int j = 0; j < q2; ++j) F(q1 + j) = std::min(lam.ineq(j), -g2(j));
    }
    return F;
  }

 private:
  const ModelSpec& model_;
  const Vec& x0_;
  const CouplingSignals& coupling_;
  const TimeGrid& grid_;
  const AgentOptions& opts_;
  DiscreteMeasure empty_;
  double sweep_tol_;
};

Multipliers unpack(const Vec& lambda, int q1, int q2) {
  return {lambda.head(q1), lambda.tail(q2)};
}

}  // namespace

AgentTrajectory solve_agent(const ModelSpec& model, const Vec& x0,
                            const CouplingSignals& coupling, const TimeGrid& grid,
                            const AgentOptions& opts, const AgentTrajectory* warm) {
  model.dims.validate();
  if (x0.size() != model.dims.n_state) {
    throw SizeMismatch("solve_agent", "initial state has the wrong dimension");
  }
  const int q1 = model.dims.n_g1;
  const int q2 = model.dims.n_g2;
  const int q = q1 + q2;
  const double terminal_tol = opts.terminal_tol > 0.0 ? opts.terminal_tol : opts.tol;
  const SweepSolver solver(model, x0, coupling, grid, opts);

  AgentTrajectory last;  // warm start for the next shot
  Vec lambda = Vec::Zero(q);
  if (warm && static_cast<int>(warm->p.size()) == grid.nodes()) {
    last.p = warm->p;
    last.active = warm->active;
    if (warm->lambda1.size() == q1 && warm->lambda2.size() == q2) {
      lambda << warm->lambda1, warm->lambda2;
    }
  }

  AgentTrajectory best;
  double best_norm = std::numeric_limits<double>::infinity();
  int shots = 0;
  // Solves the sweep at fixed multipliers and returns the raw terminal
  // constraint values (g1, g2); also tracks the shot with the smallest
  // complementarity-aware violation.
  auto shoot = [&](const Vec& lam) -> Vec {
    if (++shots > 4 * opts.max_multiplier_iter + 200) {
      throw MaxIterations("solve_agent", "terminal multiplier search exhausted");
    }
    const Multipliers m = unpack(lam, q1, q2);
    SweepOutcome outcome = solver.run(m, last);
    if (!outcome.converged) {
      throw NoConvergence("solve_agent", "forward-backward sweep did not converge",
                          outcome.change);
    }
    const Vec F = solver.terminal_violation(outcome.traj, m);
    const double norm = q > 0 ? F.lpNorm<Eigen::Infinity>() : 0.0;
    last = outcome.traj;
    if (norm < best_norm) {
      best_norm = norm;
      best = std::move(outcome.traj);
    }
    const Vec& xT = last.gamma[grid.nt];
    Vec g(q);
    if (q1 > 0) g.head(q1) = model.terminal_eq(xT);
    if (q2 > 0) g.tail(q2) = model.terminal_ineq(xT);
    return g;
  };
  auto residual_of = [&](const Vec& lam, const Vec& g) {
    Vec F = g;
    for (int j = 0; j < q2; ++j) F(q1 + j) = std::min(lam(q1 + j), -g(q1 + j));
    return F;
  };

  Vec g0 = shoot(lambda);
  if (q == 1 && best_norm > terminal_tol) {
    // Scalar multiplier: bracket a root of the constraint value and refine it.
    const bool inequality = q2 == 1;
    double a = lambda(0);
    double fa = g0(0);
    if (inequality && a != 0.0) {
      a = 0.0;
      fa = shoot(Vec::Zero(1))(0);
    }
    if (!(inequality && fa <= 0.0 && best_norm <= terminal_tol)) {
      auto value = [&](double l) { return shoot(Vec::Constant(1, l))(0); };
      double step = std::max(1.0, std::abs(a));
      double b = a + step;
      double fb = value(b);
      if (!inequality && (fa > 0) == (fb > 0) && std::abs(fb) > std::abs(fa)) {
        step = -step;
        b = a + step;
        fb = value(b);
      }
      int expansions = 0;
      while ((fa > 0) == (fb > 0) && fb != 0.0) {
        if (++expansions > 60) {
          throw NoConvergence("solve_agent", "could not bracket the terminal multiplier",
                              best_norm);
        }
        a = b;
        fa = fb;
        step *= 2.0;
        b = a + step;
        fb = value(b);
      }
      if (fb != 0.0 && best_norm > terminal_tol) {
        double lo = std::min(a, b), hi = std::max(a, b);
        double flo = lo == a ? fa : fb, fhi = lo == a ? fb : fa;
        boost::uintmax_t iters = static_cast<boost::uintmax_t>(opts.max_multiplier_iter);
        auto stop = [&](double x, double y) {
          return best_norm <= terminal_tol ||
                 std::abs(y - x) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                        std::max(1.0, std::abs(x));
        };
        boost::math::tools::toms748_solve(value, lo, hi, flo, fhi, stop, iters);
      }
    }
  } else if (q > 1 && best_norm > terminal_tol) {
    // Semismooth Newton on F = (g1, min(lambda2, -g2)) with a difference Jacobian.
    Vec F = residual_of(lambda, g0);
    for (int it = 0; it < opts.max_multiplier_iter && best_norm > terminal_tol; ++it) {
      Mat J(q, q);
      for (int j = 0; j < q; ++j) {
        Vec lp = lambda;
        const double h = 1e-6 * (1.0 + std::abs(lambda(j)));
        lp(j) += h;
        J.col(j) = (residual_of(lp, shoot(lp)) - F) / h;
      }
      const double mu = 1e-12 * (1.0 + J.squaredNorm());
      const Vec d = (J.transpose() * J + mu * Mat::Identity(q, q))
                        .ldlt()
                        .solve(-J.transpose() * F);
      double t = 1.0;
      const double f0 = F.norm();
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        const Vec trial = lambda + t * d;
        const Vec Ft = residual_of(trial, shoot(trial));
        if (Ft.norm() <= (1.0 - 1e-4 * t) * f0) {
          lambda = trial;
          F = Ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }

  if (best_norm > terminal_tol) {
    throw NoConvergence("solve_agent", "terminal conditions not met", best_norm);
  }
  best.x0 = x0;
  best.cost = cost_eval(model, best.gamma, best.v, coupling, grid);
  return best;
}

PmpResidual pmp_residual(const ModelSpec& model, const AgentTrajectory& traj,
                         const CouplingSignals& coupling, const TimeGrid& grid) {
  const int nt = grid.nt;
  if (static_cast<int>(traj.gamma.size()) != nt + 1 ||
      static_cast<int>(traj.p.size()) != nt + 1 || static_cast<int>(traj.v.size()) != nt) {
    throw IncompatibleGrids("pmp_residual", "trajectory inconsistent with the grid");
  }
  const bool has_nu = model.dims.n_c > 0;
  if (has_nu && static_cast<int>(traj.nu.size()) != nt) {
    throw IncompatibleGrids("pmp_residual", "multiplier path inconsistent with the grid");
  }
  const DiscreteMeasure empty(model.dims.n_state);
  const Vec no_nu;
  PmpResidual r;
  const double dt = grid.dt();
  for (int k = 0; k < nt; ++k) {
    const Vec& x = traj.gamma[k];
    const Vec& v = traj.v[k];
    const Vec& nu = has_nu ? traj.nu[k] : no_nu;
    const Vec step = euler_step(model, x, v, dt);
    r.dynamics_residual =
        std::max(r.dynamics_residual, (traj.gamma[k + 1] - step).lpNorm<Eigen::Infinity>());
    const Vec rhs =
        adjoint_rhs(model, x, v, nu, traj.p[k + 1], marginal_at(coupling, k, empty));
    r.adjoint_residual = std::max(
        r.adjoint_residual,
        ((traj.p[k] - traj.p[k + 1]) / dt - rhs).lpNorm<Eigen::Infinity>());
    Vec stat = model.running_cost_dv(x, v) + price_at(coupling, k) +
               model.input(x).transpose() * traj.p[k + 1];
    if (has_nu) {
      stat += model.mixed_dv(x, v).transpose() * nu;
      const Vec c = model.mixed(x, v);
      const double comp = std::max({std::abs(nu.dot(c)), std::max(0.0, c.maxCoeff()),
                                    std::max(0.0, -nu.minCoeff())});
      r.complementarity_residual = std::max(r.complementarity_residual, comp);
    }
    const double s = stat.lpNorm<Eigen::Infinity>();
    if (s > r.stationarity_residual) {
      r.stationarity_residual = s;
      r.worst_stationarity_node = k;
    }
  }
  const Vec& xT = traj.gamma[nt];
  const int q1 = model.dims.n_g1, q2 = model.dims.n_g2;
  const Vec l1 = q1 > 0 ? traj.lambda1 : Vec();
  const Vec l2 = q2 > 0 ? traj.lambda2 : Vec();
  if ((q1 > 0 && l1.size() != q1) || (q2 > 0 && l2.size() != q2)) {
    throw SizeMismatch("pmp_residual", "terminal multipliers have the wrong size");
  }
  if (q1 > 0) r.terminal_residual = model.terminal_eq(xT).lpNorm<Eigen::Infinity>();
  if (q2 > 0) {
    const Vec g2 = model.terminal_ineq(xT);
    r.terminal_residual = std::max(r.terminal_residual, std::max(0.0, g2.maxCoeff()));
    r.complementarity_residual =
        std::max({r.complementarity_residual, std::abs(l2.dot(g2)),
                  std::max(0.0, -l2.minCoeff())});
  }
  const Vec pT = terminal_costate(model, xT, l1, l2, marginal_at(coupling, nt, empty));
  r.transversality_residual = (traj.p[nt] - pT).lpNorm<Eigen::Infinity>();
  return r;
}

TrajectoryBounds bounds_report(const std::vector<const AgentTrajectory*>& trajectories,
                               const TimeGrid& grid) {
  TrajectoryBounds b;
  const double dt = grid.dt();
  for (const AgentTrajectory* t : trajectories) {
    if (!t) continue;
    for (std::size_t k = 0; k < t->gamma.size(); ++k) {
      b.state = std::max(b.state, t->gamma[k].norm());
      if (k + 1 < t->gamma.size()) {
        b.state_rate = std::max(b.state_rate, (t->gamma[k + 1] - t->gamma[k]).norm() / dt);
      }
    }
    for (std::size_t k = 0; k < t->p.size(); ++k) {
      b.costate = std::max(b.costate, t->p[k].norm());
      if (k + 1 < t->p.size()) {
        b.costate_rate = std::max(b.costate_rate, (t->p[k + 1] - t->p[k]).norm() / dt);
      }
    }
  }
  return b;
}

}  // namespace mfgc
