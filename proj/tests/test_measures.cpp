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
#include "mfgc/measures.hpp"
#include "mfgc/transport.hpp"

using fixture::scalar;
using mfgc::Mat;
using mfgc::Vec;

namespace {

Mat cost_matrix(const mfgc::DiscreteMeasure& a, const mfgc::DiscreteMeasure& b) {
  Mat c(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c(i, j) = (a.points()[i] - b.points()[j]).norm();
  return c;
}

double node_d1(const mfgc::ParticleMeasure& a, const mfgc::ParticleMeasure& b, int node) {
  return mfgc::wasserstein1(mfgc::marginal_state(a, node), mfgc::marginal_state(b, node)).value;
}

}  // namespace

TEST_CASE("marginals: single particle is one atom") {
  const mfgc::TimeGrid g(1.0, 4);
  const auto m = fixture::single_particle(g, fixture::path_from(g, {0.1, 0.2, 0.3, 0.4, 0.5},
                                                                 {0.0, 0.0, 0.0, 0.0, 0.0}));
  const mfgc::DiscreteMeasure x = mfgc::marginal_state(m, 2);
  REQUIRE(x.size() == 1);
  CHECK(x.points()[0](0) == 0.3);
  CHECK(x.weights()[0] == 1.0);
  const mfgc::MeasureSnapshot s = mfgc::marginal_state_costate(m, 4);
  CHECK(s.x[0](0) == 0.5);
  CHECK(s.q[0](0) == 0.0);
}

TEST_CASE("marginals: identical trajectories collapse to one atom in distance") {
  const mfgc::TimeGrid g(1.0, 4);
  const auto p = fixture::path_from(g, {0.1, 0.2, 0.3, 0.4, 0.5}, {0.0, 0.0, 0.0, 0.0, 0.0});
  mfgc::ParticleMeasure two(g, mfgc::MeasureKind::kStateCostate);
  two.particles = {{p, 0.5, 0}, {p, 0.5, 1}};
  const auto one = fixture::single_particle(g, p);
  for (int k = 0; k <= 4; ++k) CHECK(node_d1(two, one, k) == 0.0);
  CHECK(mfgc::trajectory_d1(two, one).value == 0.0);
}

TEST_CASE("marginals: the initial marginal is the initial distribution") {
  mfgc::InitialDistribution d;
  d.lower = scalar(0.2);
  d.upper = scalar(0.8);
  d.count = 12;
  d.seed = 5;
  const mfgc::DiscreteMeasure atoms = mfgc::sample_initial(d);
  const mfgc::TimeGrid g(1.0, 10);
  const mfgc::ParticleMeasure k = mfgc::initial_measure(fixture::gas_demo_model(), atoms, g, 3);
  const mfgc::DiscreteMeasure m0 = mfgc::marginal_state(k, 0);
  REQUIRE(m0.size() == atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    CHECK(m0.points()[i](0) == atoms.points()[i](0));
    CHECK(m0.weights()[i] == doctest::Approx(atoms.weights()[i]).epsilon(1e-15));
  }
}

TEST_CASE("marginals: a state-control measure has no costate snapshot") {
  const mfgc::TimeGrid g(1.0, 2);
  mfgc::ParticleMeasure m(g, mfgc::MeasureKind::kStateControl);
  m.particles.push_back({fixture::path_from(g, {0.0, 0.1, 0.2}, {0.0, 0.0, 0.0}), 1.0, 0});
  CHECK_THROWS_AS(mfgc::marginal_state_costate(m, 0), mfgc::WrongKind);
}

TEST_CASE("transport: equal weights match permutation enumeration") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    for (int dim : {1, 2}) {
      const auto a = fixture::random_measure(n, dim, true, rng);
      const auto b = fixture::random_measure(n, dim, true, rng);
      const mfgc::W1Result r = mfgc::wasserstein1(a, b);
      CHECK(r.exact);
      CHECK(r.method == (dim == 1 ? "scalar" : "assignment"));
      CHECK(std::abs(r.value - oracle::w1_permutations(cost_matrix(a, b))) <= 1e-12);
    }
  }
}

TEST_CASE("transport: general weights match vertex enumeration") {
  std::mt19937_64 rng(22);
  const std::vector<std::pair<int, int>> sizes{{2, 2}, {3, 2}, {4, 4}, {5, 4}, {3, 6}, {8, 2}, {7, 3}};
  for (auto [n, m] : sizes) {
    for (int dim : {1, 2}) {
      const auto a = fixture::random_measure(n, dim, false, rng);
      const auto b = fixture::random_measure(m, dim, false, rng);
      const mfgc::W1Result r = mfgc::wasserstein1(a, b);
      CHECK(r.exact);
      const double expected = oracle::w1_vertices(cost_matrix(a, b), a.weights(), b.weights());
      CHECK(std::abs(r.value - expected) <= 1e-12);
    }
  }
}

TEST_CASE("transport: network simplex on arbitrary costs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4, m = 2 + (trial / 4) % 4;
    Mat c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = oracle::uniform(rng, 0.0, 3.0);
    std::vector<double> a(n), b(m);
    double ta = 0.0, tb = 0.0;
    for (double& x : a) ta += (x = oracle::uniform(rng, 0.1, 1.0));
    for (double& x : b) tb += (x = oracle::uniform(rng, 0.1, 1.0));
    for (double& x : a) x /= ta;
    for (double& x : b) x /= tb;
    CHECK(std::abs(mfgc::transport_lp(c, a, b) - oracle::w1_vertices(c, a, b)) <= 1e-12);
  }
}

TEST_CASE("transport: assignment solver is optimal on square costs") {
  std::mt19937_64 rng(24);
  for (int n = 1; n <= 7; ++n) {
    Mat c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = oracle::uniform(rng, -1.0, 1.0);
    const std::vector<int> perm = mfgc::min_cost_assignment(c);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += c(i, perm[i]);
    CHECK(total / n == doctest::Approx(oracle::w1_permutations(c)).epsilon(1e-13));
  }
}

TEST_CASE("transport: single-point sides and the entropic fallback") {
  std::mt19937_64 rng(25);
  const auto a = fixture::random_measure(30, 2, false, rng);
  const mfgc::DiscreteMeasure point({Vec::Zero(2)}, {1.0});
  double expected = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) expected += a.weights()[i] * a.points()[i].norm();
  const mfgc::W1Result r = mfgc::wasserstein1(a, point);
  CHECK(r.exact);
  CHECK(r.method == "product");
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-14));

  const auto b = fixture::random_measure(25, 2, false, rng);
  mfgc::TransportLimits tiny;
  tiny.assignment_max = 0;
  tiny.lp_max_entries = 0;
  const mfgc::W1Result approx = mfgc::wasserstein1(a, b, {}, tiny);
  const mfgc::W1Result exact = mfgc::wasserstein1(a, b);
  CHECK_FALSE(approx.exact);
  CHECK(approx.method == "sinkhorn");
  CHECK(exact.method == "lp");
  // The entropic plan is feasible, so its cost is an upper bound.
  CHECK(approx.value >= exact.value - 1e-12);
  CHECK(approx.value <= 1.05 * exact.value);
}

TEST_CASE("transport: metric axioms on random triples") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 3;
    const bool uniform = trial % 2 == 0;
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto a = fixture::random_measure(n, dim, uniform, rng);
    const auto b = fixture::random_measure(uniform ? n : 1 + static_cast<int>(rng() % 12), dim, uniform, rng);
    const auto c = fixture::random_measure(uniform ? n : 1 + static_cast<int>(rng() % 12), dim, uniform, rng);
    const double ab = mfgc::wasserstein1(a, b).value, ba = mfgc::wasserstein1(b, a).value;
    const double bc = mfgc::wasserstein1(b, c).value, ac = mfgc::wasserstein1(a, c).value;
    CHECK(mfgc::wasserstein1(a, a).value <= 1e-12);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) <= 1e-10);
    CHECK(ac <= ab + bc + 1e-10);
  }
}

TEST_CASE("transport: split-max ground metric") {
  Vec a(2), b(2);
  a << 0.0, 0.0;
  b << 0.3, -0.5;
  CHECK(mfgc::GroundMetric::split_max(1)(a, b) == 0.5);
  CHECK(mfgc::GroundMetric::euclidean()(a, b) == doctest::Approx(std::sqrt(0.34)));
  const mfgc::MeasureSnapshot s{{scalar(0.0)}, {scalar(0.0)}, {1.0}};
  const mfgc::MeasureSnapshot t{{scalar(0.3)}, {scalar(-0.5)}, {1.0}};
  CHECK(mfgc::snapshot_distance(s, t).value == 0.5);
}

TEST_CASE("mixture: weights (1, 0) keep the first measure") {
  std::mt19937_64 rng(27);
  const mfgc::TimeGrid g(1.0, 10);
  const auto a = fixture::random_paths(g, 5, rng), b = fixture::random_paths(g, 5, rng);
  const mfgc::MixtureResult r = mfgc::mixture({&a, &b}, {1.0, 0.0}, 100);
  CHECK(r.dropped_mass == 0.0);
  CHECK(mfgc::trajectory_d1(r.measure, a).value == 0.0);
}

TEST_CASE("mixture: a measure mixed with itself is unchanged") {
  std::mt19937_64 rng(28);
  const mfgc::TimeGrid g(1.0, 10);
  const auto a = fixture::random_paths(g, 6, rng);
  const mfgc::MixtureResult r = mfgc::mixture({&a, &a}, {0.5, 0.5}, 100);
  CHECK(r.measure.size() == a.size());
  for (int k = 0; k <= g.nt; ++k) CHECK(node_d1(r.measure, a, k) <= 1e-15);
}

TEST_CASE("mixture: dropping a light particle perturbs marginals by at most its mass") {
  const mfgc::TimeGrid g(1.0, 4);
  const auto heavy = fixture::single_particle(
      g, fixture::path_from(g, {0.0, 0.1, 0.2, 0.3, 0.4}, {0, 0, 0, 0, 0}));
  const auto light = fixture::single_particle(
      g, fixture::path_from(g, {0.9, 0.8, 0.6, 0.7, 1.0}, {0, 0, 0, 0, 0}));
  const double w = 1e-5;
  const mfgc::MixtureResult r = mfgc::mixture({&heavy, &light}, {1.0 - w, w}, 1);
  CHECK(r.dropped_mass == doctest::Approx(w).epsilon(1e-12));
  REQUIRE(r.measure.size() == 1);
  for (int k = 0; k <= g.nt; ++k) {
    const double x0 = heavy.particles[0].path->gamma[k](0), x1 = light.particles[0].path->gamma[k](0);
    const mfgc::DiscreteMeasure exact({scalar(x0), scalar(x1)}, {1.0 - w, w});
    const double diameter = std::abs(x1 - x0);
    CHECK(mfgc::wasserstein1(exact, mfgc::marginal_state(r.measure, k)).value <= w * diameter + 1e-15);
  }
}

TEST_CASE("mixture: protected newest particles and per-atom caps") {
  const mfgc::TimeGrid g(1.0, 2);
  mfgc::ParticleMeasure old(g, mfgc::MeasureKind::kStateCostate), fresh(g, mfgc::MeasureKind::kStateCostate);
  old.particles = {{fixture::path_from(g, {0.0, 0.1, 0.2}, {0, 0, 0}), 0.3, 0},
                   {fixture::path_from(g, {0.0, 0.2, 0.3}, {0, 0, 0}), 0.2, 0},
                   {fixture::path_from(g, {0.5, 0.5, 0.5}, {0, 0, 0}), 0.5, 1}};
  fresh.particles = {{fixture::path_from(g, {0.0, 0.0, 0.0}, {0, 0, 0}), 0.5, 0},
                     {fixture::path_from(g, {0.5, 0.6, 0.7}, {0, 0, 0}), 0.5, 1}};
  const mfgc::MixtureResult r =
      mfgc::mixture({&old, &fresh}, {0.9, 0.1}, 1, mfgc::CapScope::kPerAtom, true);
  // One particle per atom survives, it is the newest one, and the atom
  // masses are preserved.
  REQUIRE(r.measure.size() == 2);
  for (const mfgc::Particle& p : r.measure.particles) {
    const auto& src = fresh.particles[p.atom].path;
    CHECK(p.path->gamma[2](0) == src->gamma[2](0));
  }
  const std::vector<double> mass = r.measure.atom_mass();
  CHECK(mass[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mass[1] == doctest::Approx(0.5).epsilon(1e-14));
  // Every old particle is dropped: 0.9 of the mass.
  CHECK(r.dropped_mass == doctest::Approx(0.9).epsilon(1e-12));
  // Without protection the heaviest particle of each atom is kept.
  const mfgc::MixtureResult u = mfgc::mixture({&old, &fresh}, {0.9, 0.1}, 1, mfgc::CapScope::kPerAtom);
  for (const mfgc::Particle& p : u.measure.particles) {
    if (p.atom == 0) CHECK(p.path->gamma[2](0) == 0.2);
  }
}

TEST_CASE("mixture: input validation") {
  const mfgc::TimeGrid g(1.0, 2), h(1.0, 3);
  std::mt19937_64 rng(29);
  const auto a = fixture::random_paths(g, 2, rng), b = fixture::random_paths(h, 2, rng);
  CHECK_THROWS_AS(mfgc::mixture({&a, &b}, {0.5, 0.5}, 4), mfgc::IncompatibleGrids);
  CHECK_THROWS_AS(mfgc::mixture({&a, &a}, {0.5, 0.6}, 4), mfgc::Error);
  CHECK_THROWS_AS(mfgc::mixture({&a}, {1.0, 0.0}, 4), mfgc::Error);
}

TEST_CASE("trajectory distance bounds every marginal distance") {
  std::mt19937_64 rng(30);
  const mfgc::TimeGrid g(1.0, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = fixture::random_paths(g, 4, rng), b = fixture::random_paths(g, 5, rng);
    const double whole = mfgc::trajectory_d1(a, b).value;
    for (int k = 0; k <= g.nt; ++k) {
      const double node = mfgc::snapshot_distance(mfgc::marginal_state_costate(a, k),
                                                  mfgc::marginal_state_costate(b, k)).value;
      CHECK(node <= whole + 1e-12);
    }
  }
}

TEST_CASE("holder: constant paths have ratio zero") {
  const mfgc::TimeGrid g(1.0, 10);
  const auto m = fixture::single_particle(g, fixture::path_from(g, std::vector<double>(11, 0.3),
                                                                 std::vector<double>(11, 0.0)));
  const mfgc::HolderResult h = mfgc::holder_check(m, 0.0, 0.0);
  CHECK(h.worst_ratio == 0.0);
  CHECK(h.holds);
}

TEST_CASE("holder: linear path attains the bound") {
  const mfgc::TimeGrid g(1.0, 16);
  std::vector<double> line;
  for (int k = 0; k <= 16; ++k) line.push_back(g.t(k));
  const auto m = fixture::single_particle(g, fixture::path_from(g, line, std::vector<double>(17, 0.0)));
  const mfgc::HolderResult h = mfgc::holder_check(m, 1.0, 0.0);
  // sup |t - s| / |t - s|^(1/2) over the grid is attained at |t - s| = T.
  CHECK(h.worst_ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.node_s == 0);
  CHECK(h.node_t == 16);
  CHECK(h.holds);
  CHECK_FALSE(mfgc::holder_check(m, 0.9, 0.0).holds);
}

TEST_CASE("holder: exhaustive evaluation on random paths") {
  std::mt19937_64 rng(31);
  const mfgc::TimeGrid g(1.0, 12);
  const auto m = fixture::random_paths(g, 6, rng);
  double worst = 0.0;
  for (int s = 0; s <= g.nt; ++s) {
    for (int t = s + 1; t <= g.nt; ++t) {
      const double d = mfgc::snapshot_distance(mfgc::marginal_state_costate(m, s),
                                               mfgc::marginal_state_costate(m, t)).value;
      worst = std::max(worst, d / std::sqrt(g.t(t) - g.t(s)));
    }
  }
  CHECK(mfgc::holder_check(m, 1.0, 1.0).worst_ratio == doctest::Approx(worst).epsilon(1e-13));
}

TEST_CASE("pushforward: reproduces the agent's controls") {
  const mfgc::ModelSpec model = mfgc::build_gas_storage({});
  const mfgc::TimeGrid g(1.0, 40);
  const auto c = mfgc::CouplingSignals::constant(g, scalar(0.3), 1);
  auto a = std::make_shared<mfgc::AgentTrajectory>(mfgc::solve_agent(model, scalar(0.5), c, g));
  const auto kappa = fixture::single_particle(g, a);
  const mfgc::ParticleMeasure eta = mfgc::lagrangian_pushforward(kappa, c, model);
  CHECK(eta.kind == mfgc::MeasureKind::kStateControl);
  for (int k = 0; k < g.nt; ++k) CHECK(eta.particles[0].path->v[k](0) == a->v[k](0));
  const mfgc::ParticleMeasure again = mfgc::lagrangian_pushforward(kappa, c, model);
  CHECK(mfgc::trajectory_d1(eta, again).value == 0.0);
  CHECK_THROWS_AS(mfgc::lagrangian_pushforward(eta, c, model), mfgc::WrongKind);
}

TEST_CASE("pushforward: serial and parallel agree") {
  std::mt19937_64 rng(32);
  const mfgc::ModelSpec model = mfgc::build_gas_storage({});
  const mfgc::TimeGrid g(1.0, 20);
  const auto kappa = fixture::random_paths(g, 40, rng);
  const auto c = mfgc::CouplingSignals::constant(g, scalar(-0.2), 1);
  const auto s = mfgc::lagrangian_pushforward(kappa, c, model, 1e-12, mfgc::ExecutionPolicy::kSerial);
  const auto p = mfgc::lagrangian_pushforward(kappa, c, model, 1e-12, mfgc::ExecutionPolicy::kParallel);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int k = 0; k < g.nt; ++k) CHECK(s.particles[i].path->v[k](0) == p.particles[i].path->v[k](0));
}
