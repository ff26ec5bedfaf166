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

#ifndef MFGC_TRANSPORT_HPP_
#define MFGC_TRANSPORT_HPP_

// Discrete optimal transport kernels on explicit cost matrices.

#include <string>
#include <vector>

#include "mfgc/model.hpp"

namespace mfgc {

struct TransportResult {
  double value = 0.0;
  bool exact = true;
  std::string method;
};

// Exact W1 between weighted scalar samples via the quantile formula
// integral |F_a - F_b| dx.
double scalar_w1(const std::vector<double>& xa, const std::vector<double>& wa,
                 const std::vector<double>& xb, const std::vector<double>& wb);

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns the optimal column for every row.
std::vector<int> min_cost_assignment(const Mat& cost);

// Exact transport LP by successive shortest paths with Dijkstra potentials.
// Marginals must be nonnegative with (numerically) equal totals.
double transport_lp(const Mat& cost, const std::vector<double>& a,
                    const std::vector<double>& b);

// Log-domain entropic transport; returns <plan, cost>, an approximation.
double sinkhorn(const Mat& cost, const std::vector<double>& a, const std::vector<double>& b,
                double regularization, int iterations);

struct TransportLimits {
  std::size_t assignment_max = 512;   // equal-size equal-weight sets
  std::size_t lp_max_entries = 600 * 600;
  int sinkhorn_iterations = 500;
  double sinkhorn_scale = 1e-2;       // times the median cost
};

// Picks the exact assignment path, the exact LP, or the entropic fallback.
TransportResult optimal_transport(const Mat& cost, const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  const TransportLimits& limits = {});

}  // namespace mfgc

#endif  // MFGC_TRANSPORT_HPP_
