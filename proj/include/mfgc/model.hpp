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

// Problem data for a deterministic mean field game of controls: dynamics,
// running and terminal costs, mixed state-control constraints, terminal
// constraints, the congestion term and the price function. Ships two
// built-in models (energy storage, linear-quadratic) and a sampled checker
// for the standing convexity / boundedness / qualification assumptions.

#ifndef MFGC_MODEL_HPP_
#define MFGC_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfgc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Finite discrete probability measure on R^n. The mean is computed once at
// construction; models with mean-field dependence typically only need it.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int dim);
  DiscreteMeasure(std::vector<Vec> points, std::vector<double> weights);

  const std::vector<Vec>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Vec& mean() const { return mean_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<Vec> points_;
  std::vector<double> weights_;
  Vec mean_;
};

struct Dimensions {
  int n_state = 1;
  int n_control = 1;
  int n_c = 0;
  int n_g1 = 0;
  int n_g2 = 0;
  double horizon = 1.0;

  // Throws ModelError when a count or the horizon is out of range.
  void validate() const;
};

// Where the assumption validator draws its probes.
struct ProbeBox {
  Vec x_lower;
  Vec x_upper;
  double control_radius = 2.0;
  double price_radius = 5.0;
};

// All callbacks are pure. Jacobian shapes: drift_dx n x n, input n x m,
// input_dx[i] = D b_i (n x n), mixed_dx n_c x n, mixed_dv n_c x m,
// terminal_eq_dx n_g1 x n, terminal_ineq_dx n_g2 x n.
struct ModelSpec {
  std::string name;
  Dimensions dims;

  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> drift_dx;
  std::function<Mat(const Vec&)> input;
  std::function<std::vector<Mat>(const Vec&)> input_dx;

  std::function<double(const Vec&, const Vec&)> running_cost;
  std::function<Vec(const Vec&, const Vec&)> running_cost_dx;
  std::function<Vec(const Vec&, const Vec&)> running_cost_dv;
  std::function<Mat(const Vec&, const Vec&)> running_cost_dvv;

  std::function<Vec(const Vec&, const Vec&)> mixed;
  std::function<Mat(const Vec&, const Vec&)> mixed_dx;
  std::function<Mat(const Vec&, const Vec&)> mixed_dv;
  // Optional; treated as zero when empty (exact for constraints affine in v).
  std::function<std::vector<Mat>(const Vec&, const Vec&)> mixed_dvv;

  std::function<double(const Vec&, const DiscreteMeasure&)> terminal_cost;
  std::function<Vec(const Vec&, const DiscreteMeasure&)> terminal_cost_dx;
  std::function<Vec(const Vec&)> terminal_eq;
  std::function<Mat(const Vec&)> terminal_eq_dx;
  std::function<Vec(const Vec&)> terminal_ineq;
  std::function<Mat(const Vec&)> terminal_ineq_dx;

  std::function<double(const Vec&, const DiscreteMeasure&)> congestion;
  std::function<Vec(const Vec&, const DiscreteMeasure&)> congestion_dx;

  std::function<Vec(const Vec&)> price;
  std::function<double(const Vec&)> potential;

  // Strong convexity modulus 1/C of L(x, .), also used as the lower bound for
  // singular values of active constraint gradients.
  double inverse_c = 1.0;
  // Declared sup |psi|.
  double price_bound = 1.0;

  ProbeBox probes;
};

// Uniform samples on a box, or an explicit weighted list.
struct InitialDistribution {
  enum class Kind { kUniformBox, kPoints };
  Kind kind = Kind::kUniformBox;
  Vec lower;
  Vec upper;
  int count = 1;
  std::uint64_t seed = 0;
  std::vector<Vec> points;
  std::vector<double> weights;
};

// Atoms of m0 as a measure. Uniform boxes are sampled deterministically from
// `seed`; explicit lists are normalized and checked against the box.
DiscreteMeasure sample_initial(const InitialDistribution& dist);

// ---------------------------------------------------------------------------
// Energy storage model.

struct GasStorageParams {
  double v_min = -1.0;   // maximal withdrawal rate (negative)
  double v_max = 1.0;    // maximal injection rate (positive)
  double c1 = 1.0;       // withdrawal efficiency slope
  double c2 = 1.0;       // injection efficiency slope
  double epsilon = 0.05; // smoothing of the max operators
};

// M_eps(a, b) = (a+b)/2 + sqrt((a-b)^2 + 4 eps^2)/2, evaluated in a form that
// keeps max(a,b) <= M_eps(a,b) under rounding.
double smoothed_max(double a, double b, double eps);
// Partial derivatives of smoothed_max with respect to a and b.
double smoothed_max_da(double a, double b, double eps);
double smoothed_max_db(double a, double b, double eps);

struct GapResult {
  double delta = 0.0;
  double argmin = 0.0;
};

// Grid lower approximation of min over [0,1] of
// min(v_max, c2 (1-x)) - max(v_min, -c1 x).
double delta_gap(const GasStorageParams& params, int grid_points = 100000);
GapResult delta_gap_detail(const GasStorageParams& params,
                           int grid_points = 100000);

// Smoothed lower and upper control bounds at storage level x.
double gas_lower_bound(const GasStorageParams& params, double x);
double gas_upper_bound(const GasStorageParams& params, double x);

// One state (storage level in [0,1]), one control (injection rate).
// Default hooks: L = v^2/2, f = 0, g0 = 0, no terminal constraints,
// psi(z) = z / sqrt(1 + z^2). These defaults are fixtures; callers replace
// them with the helpers below or by assigning the ModelSpec members.
// Throws ModelError when epsilon >= delta/2 or the parameter signs are wrong.
ModelSpec build_gas_storage(const GasStorageParams& params);

// ---------------------------------------------------------------------------
// Linear-quadratic fixture: x' = v, L = r v^2 / 2, g0 = q x, no constraints.

struct LqParams {
  enum class Price { kConstant, kSaturating };
  double control_weight = 1.0;  // r
  double terminal_slope = 0.0;  // q
  Price price_kind = Price::kConstant;
  double price_level = 0.0;     // constant psi value
  double horizon = 1.0;
};

ModelSpec build_lq_model(const LqParams& params);

// ---------------------------------------------------------------------------
// Hooks shared by the built-in models.

// f(x, m) = coefficient * <x, mean(m)>.
void set_mean_congestion(ModelSpec& model, double coefficient);
// g0(x, m) = coefficient * <x, mean(m)>.
void set_mean_terminal_cost(ModelSpec& model, double coefficient);
// g1(x) = x - target (equality, one row per state component).
void set_terminal_target(ModelSpec& model, const Vec& target);
// g2(x) = x - cap <= 0.
void set_terminal_cap(ModelSpec& model, const Vec& cap);
// psi(z) = gain * z / sqrt(1 + |z|^2), phi(z) = gain * (sqrt(1 + |z|^2) - 1).
void set_saturating_price(ModelSpec& model, double gain = 1.0);
// psi == level (constant), phi(z) = <level, z>.
void set_constant_price(ModelSpec& model, const Vec& level);

// ---------------------------------------------------------------------------
// Sampled assumption checks.

struct AssumptionCheck {
  enum class Status { kPassed, kViolated, kSkipped };
  std::string name;
  std::string description;
  Status status = Status::kSkipped;
  double worst_violation = 0.0;
  int probes = 0;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool ok() const;
  const AssumptionCheck* find(const std::string& name) const;
  double worst_violation() const;
};

AssumptionReport validate_assumptions(const ModelSpec& model, int probes,
                                      double tol, std::uint64_t seed = 1);

}  // namespace mfgc

#endif  // MFGC_MODEL_HPP_
