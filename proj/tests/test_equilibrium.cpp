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


#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfgc/equilibrium.hpp"
#include "mfgc/error.hpp"

using fixture::scalar;
using mfgc::Vec;

namespace {

mfgc::SolveConfig small_config(int atoms, int nt) {
  mfgc::SolveConfig c;
  c.nt = nt;
  c.m0.lower = scalar(0.2);
  c.m0.upper = scalar(0.8);
  c.m0.count = atoms;
  c.m0.seed = 12345;
  c.schedule = mfgc::DampingSchedule::kConstant;
  c.omega = 0.5;
  return c;
}

double sup_price(const mfgc::CouplingSignals& c) {
  double s = 0.0;
  for (const Vec& p : c.price) s = std::max(s, p.lpNorm<Eigen::Infinity>());
  return s;
}

}  // namespace

TEST_CASE("solve config validation and damping weights") {
  mfgc::SolveConfig c = small_config(4, 10);
  CHECK_NOTHROW(c.validate());
  CHECK(c.weight(1) == 1.0);
  CHECK(c.weight(3) == 0.5);
  c.schedule = mfgc::DampingSchedule::kHarmonic;
  CHECK(c.weight(1) == 1.0);
  CHECK(c.weight(2) == 0.5);
  CHECK(c.weight(4) == 0.25);
  c.nt = 0;
  CHECK_THROWS_AS(c.validate(), mfgc::ModelError);
  c = small_config(4, 10);
  c.omega = 1.5;
  CHECK_THROWS_AS(c.validate(), mfgc::ModelError);
  c = small_config(4, 10);
  c.support_cap = 0;
  CHECK_THROWS_AS(c.validate(), mfgc::ModelError);
}

TEST_CASE("decoupled game: independent optimal controls in at most two iterations") {
  const double P = 0.2, q = 0.3;
  const mfgc::ModelSpec m = fixture::lq_model(P, q);
  mfgc::SolveConfig c = small_config(6, 20);
  const mfgc::EquilibriumReport r = mfgc::solve_equilibrium(m, c);
  CHECK(r.status == mfgc::SolveStatus::kConverged);
  CHECK(r.trace.size() <= 2);
  for (const auto& a : r.responses.agents) {
    for (const Vec& v : a->v) CHECK(v(0) == doctest::Approx(-(P + q)).epsilon(1e-9));
  }
  for (const Vec& p : r.coupling.price) CHECK(p(0) == P);
  CHECK(r.certificate.exploitability <= 1e-10);
  // The best responses to an equilibrium reproduce it.
  const mfgc::BestResponse again =
      mfgc::best_response(m, *r.kappa, {}, mfgc::ExecutionPolicy::kSerial);
  for (std::size_t i = 0; i < again.agents.size(); ++i) {
    for (int k = 0; k < c.nt; ++k) {
      CHECK(std::abs(again.agents[i]->v[k](0) - r.responses.agents[i]->v[k](0)) <= 1e-8);
    }
  }
}

TEST_CASE("single atom: equilibrium price solves the scalar self-consistency") {
  // With one agent the game reduces to P = psi(v), v = -(P + q).
  const double q = 0.5;
  mfgc::LqParams lp;
  lp.terminal_slope = q;
  lp.price_kind = mfgc::LqParams::Price::kSaturating;
  const mfgc::ModelSpec m = mfgc::build_lq_model(lp);
  mfgc::SolveConfig c = small_config(1, 20);
  c.m0.kind = mfgc::InitialDistribution::Kind::kPoints;
  c.m0.points = {scalar(0.5)};
  c.exploitability_tol = 1e-8;
  c.price_tol = 1e-10;
  const mfgc::EquilibriumReport r = mfgc::solve_equilibrium(m, c);
  CHECK(r.status == mfgc::SolveStatus::kConverged);
  const double P = oracle::bisect(
      [q](double p) {
        const double v = -(p + q);
        return p - v / std::sqrt(1.0 + v * v);
      },
      -1.0, 1.0);
  for (const Vec& p : r.coupling.price) CHECK(std::abs(p(0) - P) <= 1e-8);
}

TEST_CASE("induced coupling respects the price bound for arbitrary measures") {
  const mfgc::ModelSpec m = fixture::gas_demo_model();
  const mfgc::TimeGrid g(1.0, 20);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const auto kappa = fixture::random_paths(g, 10, rng);
    const mfgc::CouplingSignals c = mfgc::induced_coupling(m, kappa);
    CHECK(sup_price(c) <= m.price_bound);
    REQUIRE(c.marginals.size() == static_cast<std::size_t>(g.nodes()));
  }
}

TEST_CASE("exploitability") {
  const mfgc::ModelSpec m = fixture::gas_demo_model();
  const mfgc::TimeGrid g(1.0, 20);
  mfgc::InitialDistribution d;
  d.lower = scalar(0.2);
  d.upper = scalar(0.8);
  d.count = 5;
  const mfgc::ParticleMeasure kappa = mfgc::initial_measure(m, mfgc::sample_initial(d), g, 0);
  const mfgc::BestResponse br = mfgc::best_response(m, kappa, {}, mfgc::ExecutionPolicy::kSerial);
  const mfgc::ParticleMeasure eta = mfgc::lagrangian_pushforward(
      br.measure(g), br.coupling, m);

  SUBCASE("zero for the best responses themselves") {
    CHECK(mfgc::exploitability(m, eta, br.coupling) <= 1e-8);
  }
  SUBCASE("positive after a bump") {
    mfgc::ParticleMeasure bumped = eta;
    auto path = std::make_shared<mfgc::AgentTrajectory>(*bumped.particles[2].path);
    path->v[7](0) += 0.1;
    path->gamma = mfgc::integrate_state(m, path->x0, path->v, g);
    bumped.particles[2].path = path;
    CHECK(mfgc::exploitability(m, bumped, br.coupling) > 1e-6);
  }
}

TEST_CASE("exploitability: linear-quadratic cost gap") {
  // Constant control u against constant price P: the cost gap to the optimal
  // v* = -(P + q) is (u - v*)^2 / 2 (the cost is quadratic in u).
  const double P = 0.1, q = 0.4;
  const mfgc::ModelSpec m = fixture::lq_model(P, q);
  const mfgc::TimeGrid g(1.0, 10);
  const auto c = mfgc::CouplingSignals::constant(g, scalar(P), 1);
  mfgc::ParticleMeasure eta(g, mfgc::MeasureKind::kStateControl);
  const std::vector<double> u{0.0, -0.2}, w{0.25, 0.75};
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> gamma{0.3};
    for (int k = 0; k < g.nt; ++k) gamma.push_back(gamma.back() + g.dt() * u[i]);
    eta.particles.push_back({fixture::path_from(g, gamma, std::vector<double>(11, q)), w[i], i});
    expected += w[i] * 0.5 * (u[i] + P + q) * (u[i] + P + q);
  }
  CHECK(mfgc::exploitability(m, eta, c) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("price consistency") {
  const mfgc::ModelSpec m = fixture::gas_demo_model();
  mfgc::SolveConfig c = small_config(6, 20);
  const mfgc::EquilibriumReport r = mfgc::solve_equilibrium(m, c);
  REQUIRE(r.status == mfgc::SolveStatus::kConverged);
  CHECK(r.certificate.price_consistency <= c.price_tol);
  CHECK(mfgc::price_consistency(m, *r.eta, r.coupling) <= c.price_tol);
  mfgc::CouplingSignals zero = r.coupling;
  for (Vec& p : zero.price) p.setZero();
  CHECK(mfgc::price_consistency(m, *r.eta, zero) > 1e-3);
}

TEST_CASE("monotonicity probe") {
  const mfgc::DiscreteMeasure m1({scalar(0.1), scalar(0.5)}, {0.5, 0.5});
  const mfgc::DiscreteMeasure m2({scalar(0.8)}, {1.0});
  const std::vector<std::pair<mfgc::DiscreteMeasure, mfgc::DiscreteMeasure>> pairs{{m1, m2}};
  auto mean_coupling = [](double s) {
    return [s](const Vec& x, const mfgc::DiscreteMeasure& m) { return s * x(0) * m.mean()(0); };
  };
  const double gap = (0.3 - 0.8) * (0.3 - 0.8);
  CHECK(mfgc::monotonicity_probe(mean_coupling(1.0), pairs) == doctest::Approx(gap).epsilon(1e-14));
  CHECK(mfgc::monotonicity_probe(mean_coupling(-1.0), pairs) == doctest::Approx(-gap).epsilon(1e-14));
  CHECK(mfgc::monotonicity_probe([](const Vec& x, const mfgc::DiscreteMeasure&) { return x(0) * x(0); },
                                 pairs) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  const mfgc::ModelSpec model = fixture::gas_demo_model();
  const auto random_pairs = mfgc::random_measure_pairs(model, 50, 6, 3);
  CHECK(mfgc::monotonicity_probe(model.congestion, random_pairs) >= 0.0);
  CHECK(mfgc::monotonicity_probe(mean_coupling(-1.0), random_pairs) < 0.0);
  CHECK(mfgc::potential_convexity_probe(model, 50, 4) > 0.0);
}

TEST_CASE("serial and parallel solves are identical") {
  const mfgc::ModelSpec m = fixture::gas_demo_model();
  mfgc::SolveConfig c = small_config(8, 20);
  c.max_iter = 6;
  c.policy = mfgc::ExecutionPolicy::kSerial;
  const mfgc::EquilibriumReport s = mfgc::solve_equilibrium(m, c);
  c.policy = mfgc::ExecutionPolicy::kParallel;
  const mfgc::EquilibriumReport p = mfgc::solve_equilibrium(m, c);
  REQUIRE(s.trace.size() == p.trace.size());
  for (std::size_t k = 0; k < s.coupling.price.size(); ++k) CHECK(s.coupling.price[k](0) == p.coupling.price[k](0));
  for (std::size_t i = 0; i < s.trace.size(); ++i) {
    CHECK(s.trace[i].exploitability == p.trace[i].exploitability);
    CHECK(s.trace[i].price_change == p.trace[i].price_change);
  }
}

TEST_CASE("uniqueness experiment") {
  SUBCASE("decoupled game has no gaps") {
    const mfgc::ModelSpec m = fixture::lq_model(0.2, 0.3);
    const mfgc::UniquenessReport u = mfgc::uniqueness_experiment(m, small_config(4, 10), 3);
    CHECK(u.runs.size() == 3);
    CHECK(u.price_gap <= 1e-8);
    CHECK(u.cost_gap <= 1e-8);
    CHECK(u.mean_cost_gap <= 1e-8);
  }
  SUBCASE("a non-monotone coupling is flagged") {
    mfgc::ModelSpec m = fixture::gas_demo_model();
    mfgc::set_mean_congestion(m, -0.5);
    mfgc::SolveConfig c = small_config(4, 10);
    c.max_iter = 20;
    const mfgc::UniquenessReport u = mfgc::uniqueness_experiment(m, c, 2);
    CHECK_FALSE(u.preconditions_ok);
    CHECK(u.congestion_monotonicity < 0.0);
    CHECK(u.runs.size() == 2);
  }
  SUBCASE("monotone storage game agrees across starts") {
    const mfgc::ModelSpec m = fixture::gas_demo_model();
    mfgc::SolveConfig c = small_config(6, 20);
    c.exploitability_tol = 1e-7;
    const mfgc::UniquenessReport u = mfgc::uniqueness_experiment(m, c, 2);
    CHECK(u.preconditions_ok);
    CHECK(u.price_gap <= 1e-4);
    CHECK(u.mean_cost_gap <= 1e-4);
  }
}
