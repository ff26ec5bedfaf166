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

// Small hand-built models and measures shared by the tests.

#ifndef MFGC_TESTS_FIXTURES_HPP_
#define MFGC_TESTS_FIXTURES_HPP_

#include <memory>
#include <random>
#include <vector>

#include "mfgc/equilibrium.hpp"
#include "mfgc/measures.hpp"
#include "mfgc/model.hpp"
#include "mfgc/ocp.hpp"
#include "oracles.hpp"

namespace fixture {

using mfgc::Mat;
using mfgc::Vec;

inline Vec scalar(double x) { return Vec::Constant(1, x); }

// x' = v in R^d, L = |v|^2 / 2, |v_i| <= bound, saturating price.
inline mfgc::ModelSpec box_model(int d, double bound) {
  mfgc::ModelSpec m = mfgc::build_lq_model({});
  m.name = "box";
  m.dims.n_state = d;
  m.dims.n_control = d;
  m.dims.n_c = 2 * d;
  m.drift = [d](const Vec&) { return Vec::Zero(d); };
  m.drift_dx = [d](const Vec&) { return Mat::Zero(d, d); };
  m.input = [d](const Vec&) { return Mat::Identity(d, d); };
  m.input_dx = [d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(d, d)); };
  m.running_cost = [](const Vec&, const Vec& v) { return 0.5 * v.squaredNorm(); };
  m.running_cost_dx = [d](const Vec&, const Vec&) { return Vec::Zero(d); };
  m.running_cost_dv = [](const Vec&, const Vec& v) -> Vec { return v; };
  m.running_cost_dvv = [d](const Vec&, const Vec&) -> Mat { return Mat::Identity(d, d); };
  m.mixed = [d, bound](const Vec&, const Vec& v) {
    Vec c(2 * d);
    c.head(d) = v.array() - bound;
    c.tail(d) = -v.array() - bound;
    return c;
  };
  m.mixed_dx = [d](const Vec&, const Vec&) { return Mat::Zero(2 * d, d); };
  m.mixed_dv = [d](const Vec&, const Vec&) {
    Mat g(2 * d, d);
    g.topRows(d) = Mat::Identity(d, d);
    g.bottomRows(d) = -Mat::Identity(d, d);
    return g;
  };
  m.terminal_cost = [](const Vec&, const mfgc::DiscreteMeasure&) { return 0.0; };
  m.terminal_cost_dx = [d](const Vec&, const mfgc::DiscreteMeasure&) { return Vec::Zero(d); };
  m.terminal_eq = [](const Vec&) { return Vec(0); };
  m.terminal_eq_dx = [d](const Vec&) { return Mat(0, d); };
  m.terminal_ineq = [](const Vec&) { return Vec(0); };
  m.terminal_ineq_dx = [d](const Vec&) { return Mat(0, d); };
  m.congestion = [](const Vec&, const mfgc::DiscreteMeasure&) { return 0.0; };
  m.congestion_dx = [d](const Vec&, const mfgc::DiscreteMeasure&) { return Vec::Zero(d); };
  mfgc::set_saturating_price(m, 1.0);
  m.probes.x_lower = Vec::Constant(d, -1.0);
  m.probes.x_upper = Vec::Constant(d, 1.0);
  return m;
}

inline mfgc::ModelSpec lq_model(double price_level, double q) {
  mfgc::LqParams p;
  p.terminal_slope = q;
  p.price_level = price_level;
  return mfgc::build_lq_model(p);
}

// The gas storage model with the mean-field hooks used by the demo.
inline mfgc::ModelSpec gas_demo_model() {
  mfgc::ModelSpec m = mfgc::build_gas_storage({});
  mfgc::set_mean_congestion(m, 0.5);
  return m;
}

// A scalar trajectory given by node values; the controls are the difference
// quotients and the costate is the given path.
inline std::shared_ptr<mfgc::AgentTrajectory> path_from(const mfgc::TimeGrid& grid,
                                                        const std::vector<double>& gamma,
                                                        const std::vector<double>& p) {
  auto a = std::make_shared<mfgc::AgentTrajectory>();
  a->x0 = scalar(gamma.front());
  for (double g : gamma) a->gamma.push_back(scalar(g));
  for (double q : p) a->p.push_back(scalar(q));
  for (int k = 0; k < grid.nt; ++k) {
    a->v.push_back(scalar((gamma[k + 1] - gamma[k]) / grid.dt()));
    a->nu.push_back(Vec(0));
    a->active.emplace_back();
  }
  a->lambda1 = Vec(0);
  a->lambda2 = Vec(0);
  return a;
}

inline mfgc::ParticleMeasure single_particle(const mfgc::TimeGrid& grid,
                                             std::shared_ptr<const mfgc::AgentTrajectory> a) {
  mfgc::ParticleMeasure m(grid, mfgc::MeasureKind::kStateCostate);
  m.particles.push_back({std::move(a), 1.0, 0});
  return m;
}

// A random state-costate measure of `count` particles on a scalar grid; the
// states are random walks started in [0, 1].
inline mfgc::ParticleMeasure random_paths(const mfgc::TimeGrid& grid, int count,
                                          std::mt19937_64& rng) {
  mfgc::ParticleMeasure m(grid, mfgc::MeasureKind::kStateCostate);
  for (int i = 0; i < count; ++i) {
    std::vector<double> g{oracle::uniform(rng, 0.0, 1.0)}, p{oracle::uniform(rng, -1.0, 1.0)};
    for (int k = 0; k < grid.nt; ++k) {
      g.push_back(g.back() + grid.dt() * oracle::uniform(rng, -1.0, 1.0));
      p.push_back(p.back() + grid.dt() * oracle::uniform(rng, -1.0, 1.0));
    }
    m.particles.push_back({path_from(grid, g, p), 1.0 / count, i});
  }
  return m;
}

inline mfgc::DiscreteMeasure random_measure(int size, int dim, bool uniform_weights,
                                            std::mt19937_64& rng) {
  std::vector<Vec> pts;
  std::vector<double> w;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    Vec x(dim);
    for (int j = 0; j < dim; ++j) x(j) = oracle::uniform(rng, -1.0, 1.0);
    pts.push_back(x);
    w.push_back(uniform_weights ? 1.0 : oracle::uniform(rng, 0.1, 1.0));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return {pts, w};
}

}  // namespace fixture

#endif  // MFGC_TESTS_FIXTURES_HPP_
