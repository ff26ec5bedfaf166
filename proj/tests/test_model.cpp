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

#include "doctest.h"
#include "fixtures.hpp"
#include "mfgc/error.hpp"
#include "mfgc/model.hpp"

using fixture::scalar;
using mfgc::Vec;

TEST_CASE("smoothed max: fixed values") {
  CHECK(mfgc::smoothed_max(0.0, 0.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(mfgc::smoothed_max(3.0, -1.0, 0.0) == 3.0);
  CHECK(mfgc::smoothed_max(-1.0, 3.0, 0.0) == 3.0);
}

TEST_CASE("smoothed max: error bound on random arguments") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = oracle::uniform(rng, -10.0, 10.0);
    const double b = oracle::uniform(rng, -10.0, 10.0);
    const double eps = oracle::uniform(rng, 0.0, 1.0);
    const double m = mfgc::smoothed_max(a, b, eps);
    CHECK(m >= std::max(a, b));
    CHECK(m <= std::max(a, b) + eps);
    // Agrees with the textbook formula evaluated in extended precision.
    CHECK(std::abs(m - static_cast<double>(oracle::smooth_max(a, b, eps))) <=
          4e-16 * (1.0 + std::abs(m)));
  }
}

TEST_CASE("smoothed max: derivatives match central differences") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const double a = oracle::uniform(rng, -2.0, 2.0), b = oracle::uniform(rng, -2.0, 2.0);
    const double eps = oracle::uniform(rng, 0.01, 0.5), h = 1e-6;
    const double da = (mfgc::smoothed_max(a + h, b, eps) - mfgc::smoothed_max(a - h, b, eps)) / (2 * h);
    const double db = (mfgc::smoothed_max(a, b + h, eps) - mfgc::smoothed_max(a, b - h, eps)) / (2 * h);
    CHECK(mfgc::smoothed_max_da(a, b, eps) == doctest::Approx(da).epsilon(1e-7));
    CHECK(mfgc::smoothed_max_db(a, b, eps) == doctest::Approx(db).epsilon(1e-7));
  }
}

TEST_CASE("gas bounds: feasible interval contains zero at half fill") {
  const mfgc::GasStorageParams p;
  CHECK(mfgc::gas_lower_bound(p, 0.5) < 0.0);
  CHECK(mfgc::gas_upper_bound(p, 0.5) > 0.0);
}

TEST_CASE("gas bounds: limits at an empty store") {
  const mfgc::GasStorageParams p;
  CHECK(std::abs(mfgc::gas_upper_bound(p, 0.0) - std::min(p.v_max, p.c2)) <= p.epsilon + 1e-15);
  CHECK(std::abs(mfgc::gas_lower_bound(p, 0.0) - std::max(p.v_min, 0.0)) <= p.epsilon);
}

TEST_CASE("gas bounds: gap agrees with a dense grid evaluation") {
  mfgc::GasStorageParams p;
  p.v_min = -0.8;
  p.v_max = 0.8;
  // Unsmoothed bounds min(v_M, c2 (1 - x)) and max(v_m, -c1 x) on [0, 1].
  double best = 1e300, where = 0.0;
  const int points = 100000;
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / (points - 1);
    const double gap = std::min(p.v_max, p.c2 * (1.0 - x)) - std::max(p.v_min, -p.c1 * x);
    if (gap < best) {
      best = gap;
      where = x;
    }
  }
  const mfgc::GapResult r = mfgc::delta_gap_detail(p, points);
  CHECK(r.delta > 0.0);
  CHECK(r.delta == doctest::Approx(best).epsilon(1e-12));
  // Symmetric parameters: the minimizer is symmetric under x -> 1 - x.
  CHECK(std::min(std::abs(r.argmin - where), std::abs(r.argmin - (1.0 - where))) <=
        1.0 / (points - 1) + 1e-12);
  CHECK(mfgc::delta_gap_detail({}, points).delta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gas bounds: gap is positive for random valid parameters") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    mfgc::GasStorageParams p;
    p.v_min = -oracle::uniform(rng, 0.2, 2.0);
    p.v_max = oracle::uniform(rng, 0.2, 2.0);
    p.c1 = oracle::uniform(rng, 0.2, 2.0);
    p.c2 = oracle::uniform(rng, 0.2, 2.0);
    p.epsilon = 0.01;
    CHECK(mfgc::delta_gap(p, 20000) > 0.0);
  }
}

TEST_CASE("gas construction rejects epsilon at or above half the gap") {
  mfgc::GasStorageParams p;
  const double delta = mfgc::delta_gap(p);
  p.epsilon = 0.5 * delta;
  CHECK_THROWS_AS(mfgc::build_gas_storage(p), mfgc::ModelError);
  p.epsilon = 0.6 * delta;
  CHECK_THROWS_AS(mfgc::build_gas_storage(p), mfgc::ModelError);
  p.epsilon = 0.05;
  CHECK_NOTHROW(mfgc::build_gas_storage(p));
}

TEST_CASE("initial distribution: uniform box sampling is seeded and in range") {
  mfgc::InitialDistribution d;
  d.lower = scalar(0.2);
  d.upper = scalar(0.8);
  d.count = 50;
  d.seed = 3;
  const mfgc::DiscreteMeasure a = mfgc::sample_initial(d), b = mfgc::sample_initial(d);
  REQUIRE(a.size() == 50);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points()[i](0) >= 0.2);
    CHECK(a.points()[i](0) <= 0.8);
    CHECK(a.points()[i](0) == b.points()[i](0));
    total += a.weights()[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  d.seed = 4;
  CHECK(mfgc::sample_initial(d).points()[0](0) != a.points()[0](0));
}

TEST_CASE("initial distribution: explicit points are normalized") {
  mfgc::InitialDistribution d;
  d.kind = mfgc::InitialDistribution::Kind::kPoints;
  d.points = {scalar(0.1), scalar(0.4)};
  d.weights = {1.0, 3.0};
  d.lower = scalar(0.0);
  d.upper = scalar(1.0);
  const mfgc::DiscreteMeasure m = mfgc::sample_initial(d);
  REQUIRE(m.size() == 2);
  CHECK(m.weights()[1] == doctest::Approx(0.75));
  CHECK(m.mean()(0) == doctest::Approx(0.25 * 0.1 + 0.75 * 0.4));
  d.points[1] = scalar(1.5);
  CHECK_THROWS_AS(mfgc::sample_initial(d), mfgc::ModelError);
}

TEST_CASE("validator: built-in gas model passes every sampled check") {
  const mfgc::AssumptionReport r = mfgc::validate_assumptions(fixture::gas_demo_model(), 200, 1e-6);
  CHECK(r.ok());
  for (const auto& c : r.checks) {
    INFO(c.name);
    CHECK(c.status != mfgc::AssumptionCheck::Status::kViolated);
  }
  REQUIRE(r.find("H4") != nullptr);
  CHECK(r.find("H4")->status == mfgc::AssumptionCheck::Status::kSkipped);
}

TEST_CASE("validator: unbounded price is reported") {
  mfgc::ModelSpec m = fixture::gas_demo_model();
  m.price = [](const Vec& z) -> Vec { return z; };
  m.potential = [](const Vec& z) { return 0.5 * z.squaredNorm(); };
  const mfgc::AssumptionReport r = mfgc::validate_assumptions(m, 200, 1e-6);
  REQUIRE(r.find("H3-(vi)") != nullptr);
  CHECK(r.find("H3-(vi)")->status == mfgc::AssumptionCheck::Status::kViolated);
  // The gradient identity itself still holds.
  CHECK(r.find("H1-(iii)")->status == mfgc::AssumptionCheck::Status::kPassed);
}

TEST_CASE("validator: a price that is not a gradient is reported") {
  mfgc::ModelSpec m = fixture::gas_demo_model();
  m.potential = [](const Vec& z) { return z.squaredNorm(); };
  const mfgc::AssumptionReport r = mfgc::validate_assumptions(m, 200, 1e-6);
  CHECK(r.find("H1-(iii)")->status == mfgc::AssumptionCheck::Status::kViolated);
}

TEST_CASE("validator: a wrong derivative is reported") {
  mfgc::ModelSpec m = fixture::gas_demo_model();
  m.running_cost_dv = [](const Vec&, const Vec& v) -> Vec { return 2.0 * v; };
  const mfgc::AssumptionReport r = mfgc::validate_assumptions(m, 50, 1e-6);
  CHECK(r.find("derivatives")->status == mfgc::AssumptionCheck::Status::kViolated);
  CHECK_FALSE(r.ok());
}

TEST_CASE("model dimensions are validated") {
  mfgc::Dimensions d;
  CHECK_NOTHROW(d.validate());
  d.n_state = 0;
  CHECK_THROWS_AS(d.validate(), mfgc::ModelError);
  d = {};
  d.horizon = 0.0;
  CHECK_THROWS_AS(d.validate(), mfgc::ModelError);
}
