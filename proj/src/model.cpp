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

#include "mfgc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mfgc/error.hpp"
#include "mfgc/pointwise.hpp"

namespace mfgc {
namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

Vec uniform_in_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  Vec x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = uniform(rng, lo(i), hi(i));
  return x;
}

Vec uniform_in_ball(std::mt19937_64& rng, int dim, double radius) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = uniform(rng, -radius, radius);
  return v;
}

Vec mean_or_zero(const DiscreteMeasure& m, Eigen::Index dim) {
  if (m.mean().size() == dim) return m.mean();
  return Vec::Zero(dim);
}

double fd_step(double arg) { return 1e-6 * (1.0 + std::abs(arg)); }

}  // namespace

DiscreteMeasure::DiscreteMeasure(int dim) : mean_(Vec::Zero(dim)) {}

DiscreteMeasure::DiscreteMeasure(std::vector<Vec> points,
                                 std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.size() != weights_.size()) {
    throw SizeMismatch("DiscreteMeasure", "points and weights differ in size");
  }
  if (points_.empty()) {
    mean_ = Vec();
    return;
  }
  mean_ = Vec::Zero(points_.front().size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    mean_ += weights_[i] * points_[i];
  }
}

void Dimensions::validate() const {
  if (n_state < 1) throw ModelError("Dimensions", "n_state must be >= 1");
  if (n_control < 1) throw ModelError("Dimensions", "n_control must be >= 1");
  if (n_c < 0 || n_g1 < 0 || n_g2 < 0) {
    throw ModelError("Dimensions", "constraint counts must be >= 0");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ModelError("Dimensions", "horizon must be positive and finite");
  }
}

DiscreteMeasure sample_initial(const InitialDistribution& dist) {
  const Eigen::Index n = dist.lower.size();
  if (dist.upper.size() != n || n == 0) {
    throw ModelError("sample_initial", "support box must be non-empty");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dist.lower(i) <= dist.upper(i))) {
      throw ModelError("sample_initial", "support box has lower > upper");
    }
  }
  std::vector<Vec> points;
  std::vector<double> weights;
  if (dist.kind == InitialDistribution::Kind::kUniformBox) {
    if (dist.count < 1) throw ModelError("sample_initial", "count must be >= 1");
    std::mt19937_64 rng(dist.seed);
    points.reserve(dist.count);
    for (int k = 0; k < dist.count; ++k) {
      points.push_back(uniform_in_box(rng, dist.lower, dist.upper));
    }
    weights.assign(dist.count, 1.0 / dist.count);
  } else {
    if (dist.points.empty()) {
      throw ModelError("sample_initial", "explicit point list is empty");
    }
    points = dist.points;
    if (dist.weights.empty()) {
      weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    } else {
      if (dist.weights.size() != points.size()) {
        throw ModelError("sample_initial", "weights and points differ in size");
      }
      double total = 0.0;
      for (double w : dist.weights) {
        if (!(w >= 0.0)) throw ModelError("sample_initial", "negative weight");
        total += w;
      }
      if (!(total > 0.0)) throw ModelError("sample_initial", "zero total weight");
      for (double w : dist.weights) weights.push_back(w / total);
    }
    for (const Vec& p : points) {
      if (p.size() != n) {
        throw ModelError("sample_initial", "point dimension mismatch");
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        if (p(i) < dist.lower(i) || p(i) > dist.upper(i)) {
          throw ModelError("sample_initial", "point outside the support box");
        }
      }
    }
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

// ---------------------------------------------------------------------------

double smoothed_max(double a, double b, double eps) {
  const double d = a - b;
  const double root = std::sqrt(d * d + 4.0 * eps * eps);
  // (a+b)/2 + root/2 == max(a,b) + (root - |d|)/2, and the latter difference
  // is rewritten to avoid cancellation.
  const double excess = root > 0.0 ? 2.0 * eps * eps / (root + std::abs(d)) : 0.0;
  return std::max(a, b) + excess;
}

double smoothed_max_da(double a, double b, double eps) {
  const double d = a - b;
  const double root = std::sqrt(d * d + 4.0 * eps * eps);
  if (root == 0.0) return 0.5;
  return 0.5 * (1.0 + d / root);
}

double smoothed_max_db(double a, double b, double eps) {
  return 1.0 - smoothed_max_da(a, b, eps);
}

namespace {

double raw_gap(const GasStorageParams& p, double x) {
  return std::min(p.v_max, p.c2 * (1.0 - x)) - std::max(p.v_min, -p.c1 * x);
}

void check_gas_signs(const GasStorageParams& p) {
  if (!(p.v_min < 0.0)) throw ModelError("build_gas_storage", "v_m must be < 0");
  if (!(p.v_max > 0.0)) throw ModelError("build_gas_storage", "v_M must be > 0");
  if (!(p.c1 > 0.0)) throw ModelError("build_gas_storage", "c1 must be > 0");
  if (!(p.c2 > 0.0)) throw ModelError("build_gas_storage", "c2 must be > 0");
}

}  // namespace

GapResult delta_gap_detail(const GasStorageParams& params, int grid_points) {
  if (grid_points < 2) throw ModelError("delta_gap", "grid_points must be >= 2");
  GapResult best{std::numeric_limits<double>::infinity(), 0.0};
  const double h = 1.0 / (grid_points - 1);
  for (int j = 0; j < grid_points; ++j) {
    const double x = j == grid_points - 1 ? 1.0 : j * h;
    const double g = raw_gap(params, x);
    if (g < best.delta) best = {g, x};
  }
  return best;
}

double delta_gap(const GasStorageParams& params, int grid_points) {
  return delta_gap_detail(params, grid_points).delta;
}

double gas_lower_bound(const GasStorageParams& p, double x) {
  return smoothed_max(p.v_min, -p.c1 * x, p.epsilon);
}

double gas_upper_bound(const GasStorageParams& p, double x) {
  return -smoothed_max(p.c2 * (x - 1.0), -p.v_max, p.epsilon);
}

namespace {

double gas_lower_dx(const GasStorageParams& p, double x) {
  return -p.c1 * smoothed_max_db(p.v_min, -p.c1 * x, p.epsilon);
}

double gas_upper_dx(const GasStorageParams& p, double x) {
  return -p.c2 * smoothed_max_da(p.c2 * (x - 1.0), -p.v_max, p.epsilon);
}

Vec scalar(double s) { return Vec::Constant(1, s); }
Mat scalar_mat(double s) { return Mat::Constant(1, 1, s); }

// Fields shared by the scalar built-ins: x' = v, L = r v^2 / 2, no coupling.
ModelSpec scalar_integrator(double control_weight) {
  ModelSpec m;
  m.dims.n_state = 1;
  m.dims.n_control = 1;
  m.drift = [](const Vec&) { return Vec::Zero(1); };
  m.drift_dx = [](const Vec&) { return Mat::Zero(1, 1); };
  m.input = [](const Vec&) { return Mat::Identity(1, 1); };
  m.input_dx = [](const Vec&) { return std::vector<Mat>{Mat::Zero(1, 1)}; };
  const double r = control_weight;
  m.running_cost = [r](const Vec&, const Vec& v) { return 0.5 * r * v.squaredNorm(); };
  m.running_cost_dx = [](const Vec&, const Vec&) { return Vec::Zero(1); };
  m.running_cost_dv = [r](const Vec&, const Vec& v) -> Vec { return r * v; };
  m.running_cost_dvv = [r](const Vec&, const Vec&) { return scalar_mat(r); };
  m.mixed = [](const Vec&, const Vec&) { return Vec(0); };
  m.mixed_dx = [](const Vec&, const Vec&) { return Mat(0, 1); };
  m.mixed_dv = [](const Vec&, const Vec&) { return Mat(0, 1); };
  m.terminal_cost = [](const Vec&, const DiscreteMeasure&) { return 0.0; };
  m.terminal_cost_dx = [](const Vec&, const DiscreteMeasure&) { return Vec::Zero(1); };
  m.terminal_eq = [](const Vec&) { return Vec(0); };
  m.terminal_eq_dx = [](const Vec&) { return Mat(0, 1); };
  m.terminal_ineq = [](const Vec&) { return Vec(0); };
  m.terminal_ineq_dx = [](const Vec&) { return Mat(0, 1); };
  m.congestion = [](const Vec&, const DiscreteMeasure&) { return 0.0; };
  m.congestion_dx = [](const Vec&, const DiscreteMeasure&) { return Vec::Zero(1); };
  m.inverse_c = control_weight;
  return m;
}

}  // namespace

ModelSpec build_gas_storage(const GasStorageParams& params) {
  check_gas_signs(params);
  if (!(params.epsilon > 0.0)) {
    throw ModelError("build_gas_storage", "epsilon must be > 0");
  }
  const double delta = delta_gap(params);
  if (!(delta > 0.0)) {
    throw ModelError("build_gas_storage", "bound gap delta is not positive");
  }
  if (params.epsilon >= 0.5 * delta) {
    std::ostringstream msg;
    msg << "epsilon = " << params.epsilon << " must be below delta/2 = "
        << 0.5 * delta << " (both bounds could bind at once)";
    throw ModelError("build_gas_storage", msg.str());
  }

  ModelSpec m = scalar_integrator(1.0);
  m.name = "gas";
  m.dims.n_c = 2;
  const GasStorageParams p = params;
  m.mixed = [p](const Vec& x, const Vec& v) {
    Vec c(2);
    c(0) = gas_lower_bound(p, x(0)) - v(0);
    c(1) = v(0) - gas_upper_bound(p, x(0));
    return c;
  };
  m.mixed_dx = [p](const Vec& x, const Vec&) {
    Mat d(2, 1);
    d(0, 0) = gas_lower_dx(p, x(0));
    d(1, 0) = -gas_upper_dx(p, x(0));
    return d;
  };
  m.mixed_dv = [](const Vec&, const Vec&) {
    Mat d(2, 1);
    d(0, 0) = -1.0;
    d(1, 0) = 1.0;
    return d;
  };
  set_saturating_price(m, 1.0);
  m.probes.x_lower = Vec::Zero(1);
  m.probes.x_upper = Vec::Ones(1);
  m.probes.control_radius = 2.0 * std::max(-p.v_min, p.v_max);
  m.probes.price_radius = 5.0;
  return m;
}

ModelSpec build_lq_model(const LqParams& params) {
  if (!(params.control_weight > 0.0)) {
    throw ModelError("build_lq_model", "control weight must be > 0");
  }
  ModelSpec m = scalar_integrator(params.control_weight);
  m.name = "lq";
  m.dims.horizon = params.horizon;
  const double q = params.terminal_slope;
  m.terminal_cost = [q](const Vec& x, const DiscreteMeasure&) { return q * x(0); };
  m.terminal_cost_dx = [q](const Vec&, const DiscreteMeasure&) { return scalar(q); };
  if (params.price_kind == LqParams::Price::kConstant) {
    set_constant_price(m, scalar(params.price_level));
  } else {
    set_saturating_price(m, 1.0);
  }
  m.probes.x_lower = Vec::Constant(1, -1.0);
  m.probes.x_upper = Vec::Constant(1, 1.0);
  return m;
}

void set_mean_congestion(ModelSpec& model, double coefficient) {
  model.congestion = [coefficient](const Vec& x, const DiscreteMeasure& m) {
    return coefficient * x.dot(mean_or_zero(m, x.size()));
  };
  model.congestion_dx = [coefficient](const Vec& x, const DiscreteMeasure& m) -> Vec {
    return coefficient * mean_or_zero(m, x.size());
  };
}

void set_mean_terminal_cost(ModelSpec& model, double coefficient) {
  model.terminal_cost = [coefficient](const Vec& x, const DiscreteMeasure& m) {
    return coefficient * x.dot(mean_or_zero(m, x.size()));
  };
  model.terminal_cost_dx = [coefficient](const Vec& x, const DiscreteMeasure& m) -> Vec {
    return coefficient * mean_or_zero(m, x.size());
  };
}

void set_terminal_target(ModelSpec& model, const Vec& target) {
  const int n = model.dims.n_state;
  if (target.size() != n) throw ModelError("set_terminal_target", "size mismatch");
  model.dims.n_g1 = n;
  model.terminal_eq = [target](const Vec& x) -> Vec { return x - target; };
  model.terminal_eq_dx = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
}

void set_terminal_cap(ModelSpec& model, const Vec& cap) {
  const int n = model.dims.n_state;
  if (cap.size() != n) throw ModelError("set_terminal_cap", "size mismatch");
  model.dims.n_g2 = n;
  model.terminal_ineq = [cap](const Vec& x) -> Vec { return x - cap; };
  model.terminal_ineq_dx = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
}

void set_saturating_price(ModelSpec& model, double gain) {
  model.price = [gain](const Vec& z) -> Vec {
    return gain * z / std::sqrt(1.0 + z.squaredNorm());
  };
  model.potential = [gain](const Vec& z) {
    return gain * (std::sqrt(1.0 + z.squaredNorm()) - 1.0);
  };
  model.price_bound = std::abs(gain);
}

void set_constant_price(ModelSpec& model, const Vec& level) {
  model.price = [level](const Vec&) -> Vec { return level; };
  model.potential = [level](const Vec& z) { return level.dot(z); };
  model.price_bound = level.size() > 0 ? level.norm() : 0.0;
}

// ---------------------------------------------------------------------------

bool AssumptionReport::ok() const {
  return std::none_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) {
    return c.status == AssumptionCheck::Status::kViolated;
  });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double AssumptionReport::worst_violation() const {
  double w = 0.0;
  for (const auto& c : checks) {
    if (c.status != AssumptionCheck::Status::kSkipped) w = std::max(w, c.worst_violation);
  }
  return w;
}

namespace {

struct CheckAccumulator {
  AssumptionCheck check;
  double threshold;

  CheckAccumulator(std::string name, std::string description, double thr)
      : threshold(thr) {
    check.name = std::move(name);
    check.description = std::move(description);
  }
  void record(double violation) {
    ++check.probes;
    if (!std::isfinite(violation)) violation = std::numeric_limits<double>::infinity();
    check.worst_violation = std::max(check.worst_violation, violation);
  }
  AssumptionCheck finish() {
    check.status = check.worst_violation > threshold
                       ? AssumptionCheck::Status::kViolated
                       : AssumptionCheck::Status::kPassed;
    return check;
  }
};

// Relative disagreement between an analytic derivative and a central
// difference, both given column-wise.
double fd_mismatch(const Mat& analytic, const Mat& fd) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      worst = std::max(worst, std::abs(analytic(i, j) - fd(i, j)) /
                                  (1.0 + std::abs(analytic(i, j))));
    }
  }
  return worst;
}

template <class F>
Mat central_jacobian(F&& f, const Vec& at, Eigen::Index rows) {
  Mat jac(rows, at.size());
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = fd_step(at(j));
    Vec plus = at, minus = at;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return jac;
}

}  // namespace

AssumptionReport validate_assumptions(const ModelSpec& model, int probes,
                                      double tol, std::uint64_t seed) {
  model.dims.validate();
  const int n = model.dims.n_state;
  const int m = model.dims.n_control;
  const int nc = model.dims.n_c;
  std::mt19937_64 rng(seed);
  const ProbeBox& box = model.probes;
  const Vec lo = box.x_lower.size() == n ? box.x_lower : Vec::Constant(n, -1.0);
  const Vec hi = box.x_upper.size() == n ? box.x_upper : Vec::Constant(n, 1.0);
  const DiscreteMeasure no_mass(n);
  // Central differences carry O(1e-10) relative rounding noise; the
  // derivative check cannot be tighter than that.
  const double fd_tol = std::max(tol, 1e-6);

  CheckAccumulator deriv("derivatives",
                         "analytic derivatives vs central differences", fd_tol);
  CheckAccumulator h1i("H1-(i)", "L(x,.) strongly convex with modulus 1/C", tol);
  CheckAccumulator h1ii("H1-(ii)", "c_i(x,.) convex (midpoint test)", tol);
  CheckAccumulator h1iii("H1-(iii)", "psi is the gradient of a convex phi", fd_tol);
  CheckAccumulator h3vi("H3-(vi)", "psi bounded by the declared bound", tol);
  CheckAccumulator h5iii("H5-(iii)",
                         "active constraint gradients in v have singular values >= 1/C",
                         tol);

  for (int k = 0; k < probes; ++k) {
    const Vec x = uniform_in_box(rng, lo, hi);
    const Vec v = uniform_in_ball(rng, m, box.control_radius);

    // Derivative cross-checks.
    {
      double worst = 0.0;
      auto L_x = [&](const Vec& y) { return Vec::Constant(1, model.running_cost(y, v)); };
      auto L_v = [&](const Vec& u) { return Vec::Constant(1, model.running_cost(x, u)); };
      worst = std::max(worst, fd_mismatch(model.running_cost_dx(x, v).transpose(),
                                          central_jacobian(L_x, x, 1)));
      worst = std::max(worst, fd_mismatch(model.running_cost_dv(x, v).transpose(),
                                          central_jacobian(L_v, v, 1)));
      auto Lv = [&](const Vec& u) { return model.running_cost_dv(x, u); };
      worst = std::max(worst, fd_mismatch(model.running_cost_dvv(x, v),
                                          central_jacobian(Lv, v, m)));
      worst = std::max(worst, fd_mismatch(model.drift_dx(x),
                                          central_jacobian(model.drift, x, n)));
      const std::vector<Mat> db = model.input_dx(x);
      for (int i = 0; i < m; ++i) {
        auto col = [&](const Vec& y) -> Vec { return model.input(y).col(i); };
        worst = std::max(worst, fd_mismatch(db.at(i), central_jacobian(col, x, n)));
      }
      if (nc > 0) {
        auto cx = [&](const Vec& y) { return model.mixed(y, v); };
        auto cv = [&](const Vec& u) { return model.mixed(x, u); };
        worst = std::max(worst, fd_mismatch(model.mixed_dx(x, v), central_jacobian(cx, x, nc)));
        worst = std::max(worst, fd_mismatch(model.mixed_dv(x, v), central_jacobian(cv, v, nc)));
      }
      auto g0 = [&](const Vec& y) {
        return Vec::Constant(1, model.terminal_cost(y, no_mass));
      };
      worst = std::max(worst, fd_mismatch(model.terminal_cost_dx(x, no_mass).transpose(),
                                          central_jacobian(g0, x, 1)));
      auto f = [&](const Vec& y) { return Vec::Constant(1, model.congestion(y, no_mass)); };
      worst = std::max(worst, fd_mismatch(model.congestion_dx(x, no_mass).transpose(),
                                          central_jacobian(f, x, 1)));
      if (model.dims.n_g1 > 0) {
        worst = std::max(worst, fd_mismatch(model.terminal_eq_dx(x),
                                            central_jacobian(model.terminal_eq, x,
                                                             model.dims.n_g1)));
      }
      if (model.dims.n_g2 > 0) {
        worst = std::max(worst, fd_mismatch(model.terminal_ineq_dx(x),
                                            central_jacobian(model.terminal_ineq, x,
                                                             model.dims.n_g2)));
      }
      deriv.record(worst);
    }

    // H1-(i): smallest eigenvalue of the symmetric part of D_vv L.
    {
      const Mat H = model.running_cost_dvv(x, v);
      const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
      const Mat S = 0.5 * (H + H.transpose());
      const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(S).eigenvalues().minCoeff();
      h1i.record(std::max(asym, model.inverse_c - lmin));
    }

    // H1-(ii): midpoint convexity of each c_i(x, .).
    if (nc > 0) {
      const Vec v2 = uniform_in_ball(rng, m, box.control_radius);
      const Vec c1 = model.mixed(x, v);
      const Vec c2 = model.mixed(x, v2);
      const Vec cm = model.mixed(x, 0.5 * (v + v2));
      double worst = 0.0;
      for (int i = 0; i < nc; ++i) {
        const double scale = 1.0 + std::abs(c1(i)) + std::abs(c2(i));
        worst = std::max(worst, (cm(i) - 0.5 * (c1(i) + c2(i))) / scale);
      }
      h1ii.record(std::max(0.0, worst));
    }

    // H1-(iii): psi against the finite-difference gradient of phi, plus
    // midpoint convexity of phi.
    {
      const Vec z1 = uniform_in_ball(rng, m, box.price_radius);
      const Vec z2 = uniform_in_ball(rng, m, box.price_radius);
      auto phi = [&](const Vec& z) { return Vec::Constant(1, model.potential(z)); };
      const Mat grad = central_jacobian(phi, z1, 1);
      double worst = fd_mismatch(model.price(z1).transpose(), grad);
      const double mid = model.potential(0.5 * (z1 + z2));
      const double chord = 0.5 * (model.potential(z1) + model.potential(z2));
      const double scale = 1.0 + std::abs(chord);
      worst = std::max(worst, (mid - chord) / scale);
      h1iii.record(std::max(0.0, worst));
    }

    // H3-(vi): |psi| <= bound, probing far out as well.
    {
      const double radius = box.price_radius * std::pow(10.0, k % 7);
      const Vec z = uniform_in_ball(rng, m, radius);
      h3vi.record(std::max(0.0, model.price(z).norm() - model.price_bound));
    }

    // H5-(iii): drive the pointwise minimizer onto the constraint boundary with
    // a large linear term and inspect the active rows of D_v c.
    if (nc > 0) {
      const Vec r = uniform_in_ball(rng, m, 10.0 * box.control_radius);
      try {
        const KktPoint kkt = hamiltonian_min(model, x, r, 1e-12);
        if (!kkt.active_set.empty()) {
          const Mat J = model.mixed_dv(x, kkt.v);
          Mat rows(static_cast<Eigen::Index>(kkt.active_set.size()), m);
          for (std::size_t i = 0; i < kkt.active_set.size(); ++i) {
            rows.row(static_cast<Eigen::Index>(i)) = J.row(kkt.active_set[i]);
          }
          // |J_I^T w| >= (1/C)|w| is a bound on the smallest singular value of
          // J_I^T, which is zero when |I| exceeds m.
          double smin = 0.0;
          if (rows.rows() <= m) {
            Eigen::JacobiSVD<Mat> svd(rows.transpose());
            smin = svd.singularValues().minCoeff();
          }
          h5iii.record(std::max(0.0, model.inverse_c - smin));
        } else {
          h5iii.record(0.0);
        }
      } catch (const Error&) {
        h5iii.record(std::numeric_limits<double>::infinity());
      }
    }
  }

  AssumptionReport report;
  report.checks.push_back(deriv.finish());
  report.checks.push_back(h1i.finish());
  if (nc > 0) {
    report.checks.push_back(h1ii.finish());
  } else {
    report.checks.push_back({"H1-(ii)", "no mixed constraints", AssumptionCheck::Status::kSkipped, 0.0, 0});
  }
  report.checks.push_back(h1iii.finish());
  report.checks.push_back(h3vi.finish());
  if (nc > 0) {
    report.checks.push_back(h5iii.finish());
  } else {
    report.checks.push_back({"H5-(iii)", "no mixed constraints", AssumptionCheck::Status::kSkipped, 0.0, 0});
  }
  const auto skipped = AssumptionCheck::Status::kSkipped;
  report.checks.push_back({"H4", "feasibility over all trajectories (not sampled)", skipped, 0.0, 0});
  report.checks.push_back({"H5-(i)", "terminal equality controllability (not sampled)", skipped, 0.0, 0});
  report.checks.push_back({"H5-(ii)", "inward-pointing linearization (not sampled)", skipped, 0.0, 0});
  return report;
}

}  // namespace mfgc
