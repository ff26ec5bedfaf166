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

#include "mfgc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfgc/error.hpp"

namespace mfgc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double scalar_w1(const std::vector<double>& xa, const std::vector<double>& wa,
                 const std::vector<double>& xb, const std::vector<double>& wb) {
  struct Event {
    double x;
    double dw;  // +w for a, -w for b
  };
  std::vector<Event> events;
  events.reserve(xa.size() + xb.size());
  for (std::size_t i = 0; i < xa.size(); ++i) events.push_back({xa[i], wa[i]});
  for (std::size_t j = 0; j < xb.size(); ++j) events.push_back({xb[j], -wb[j]});
  std::sort(events.begin(), events.end(),
            [](const Event& l, const Event& r) { return l.x < r.x; });
  double total = 0.0;
  double gap = 0.0;  // F_a - F_b just right of the current point
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    gap += events[i].dw;
    total += std::abs(gap) * (events[i + 1].x - events[i].x);
  }
  return total;
}

std::vector<int> min_cost_assignment(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw SizeMismatch("min_cost_assignment", "cost matrix not square");
  // Shortest augmenting paths with row/column potentials (1-based sentinels).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double transport_lp(const Mat& cost, const std::vector<double>& a,
                    const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (cost.rows() != n || cost.cols() != m) {
    throw SizeMismatch("transport_lp", "cost matrix does not match the marginals");
  }
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  const double mass_eps = 1e-15 * std::max(1.0, total);
  std::vector<double> supply(a), demand(b);
  Mat flow = Mat::Zero(n, m);
  // Node potentials: rows 0..n-1, columns n..n+m-1.
  std::vector<double> pot(n + m, 0.0), dist(n + m);
  std::vector<int> parent(n + m);
  std::vector<char> done(n + m);
  const int max_rounds = 4 * (n + m) * (n + m) + 16;
  for (int round = 0; round < max_rounds; ++round) {
    bool any_supply = false;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (supply[i] > mass_eps) {
        dist[i] = 0.0;
        any_supply = true;
      }
    }
    if (!any_supply) break;
    int target = -1;
    double target_dist = kInf;
    // Dense Dijkstra on the residual bipartite graph.
    for (;;) {
      int node = -1;
      double best = kInf;
      for (int k = 0; k < n + m; ++k) {
        if (!done[k] && dist[k] < best) {
          best = dist[k];
          node = k;
        }
      }
      if (node < 0) break;
      done[node] = 1;
      if (node >= n) {
        const int j = node - n;
        if (demand[j] > mass_eps) {
          target = node;
          target_dist = best;
          break;
        }
        for (int i = 0; i < n; ++i) {
          if (done[i] || flow(i, j) <= 0.0) continue;
          const double rc = std::max(0.0, -cost(i, j) + pot[node] - pot[i]);
          if (best + rc < dist[i]) {
            dist[i] = best + rc;
            parent[i] = node;
          }
        }
      } else {
        for (int j = 0; j < m; ++j) {
          const int col = n + j;
          if (done[col]) continue;
          const double rc = std::max(0.0, cost(node, j) + pot[node] - pot[col]);
          if (best + rc < dist[col]) {
            dist[col] = best + rc;
            parent[col] = node;
          }
        }
      }
    }
    if (target < 0) break;  // demand exhausted
    for (int k = 0; k < n + m; ++k) pot[k] += std::min(dist[k], target_dist);
    // Bottleneck along the path.
    double amount = demand[target - n];
    int node = target;
    while (parent[node] >= 0) {
      const int prev = parent[node];
      if (prev >= n) amount = std::min(amount, flow(node, prev - n));  // reverse arc
      node = prev;
    }
    amount = std::min(amount, supply[node]);
    const int source = node;
    node = target;
    while (parent[node] >= 0) {
      const int prev = parent[node];
      if (prev < n) {
        flow(prev, node - n) += amount;
      } else {
        flow(node, prev - n) -= amount;
        if (flow(node, prev - n) < mass_eps) flow(node, prev - n) = 0.0;
      }
      node = prev;
    }
    supply[source] -= amount;
    demand[target - n] -= amount;
  }
  return flow.cwiseProduct(cost).sum();
}

double sinkhorn(const Mat& cost, const std::vector<double>& a, const std::vector<double>& b,
                double regularization, int iterations) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (!(regularization > 0.0)) {
    throw ModelError("sinkhorn", "regularization must be positive");
  }
  Vec f = Vec::Zero(n), g = Vec::Zero(m);
  Vec log_a(n), log_b(m);
  for (int i = 0; i < n; ++i) log_a(i) = a[i] > 0 ? std::log(a[i]) : -kInf;
  for (int j = 0; j < m; ++j) log_b(j) = b[j] > 0 ? std::log(b[j]) : -kInf;
  auto lse = [](const Vec& z) {
    const double mx = z.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((z.array() - mx).exp().sum());
  };
  const double eps = regularization;
  Vec row(m), col(n);
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      row = (g.array() - cost.row(i).transpose().array()) / eps + log_b.array();
      f(i) = -eps * lse(row);
    }
    for (int j = 0; j < m; ++j) {
      col = (f.array() - cost.col(j).array()) / eps + log_a.array();
      g(j) = -eps * lse(col);
    }
  }
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    if (a[i] <= 0) continue;
    for (int j = 0; j < m; ++j) {
      if (b[j] <= 0) continue;
      const double logp = log_a(i) + log_b(j) + (f(i) + g(j) - cost(i, j)) / eps;
      value += std::exp(logp) * cost(i, j);
    }
  }
  return value;
}

TransportResult optimal_transport(const Mat& cost, const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  const TransportLimits& limits) {
  const std::size_t n = a.size(), m = b.size();
  TransportResult out;
  if (n == 0 || m == 0) throw ModelError("optimal_transport", "empty marginal");
  if (n == 1 || m == 1) {
    // Every plan is the product plan.
    out.method = "product";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) out.value += a[i] * b[j] * cost(i, j);
    return out;
  }
  const auto uniform = [](const std::vector<double>& w) {
    const double w0 = w.front();
    return std::all_of(w.begin(), w.end(),
                       [w0](double x) { return std::abs(x - w0) <= 1e-15; });
  };
  if (n == m && n <= limits.assignment_max && uniform(a) && uniform(b)) {
    const std::vector<int> match = min_cost_assignment(cost);
    for (std::size_t i = 0; i < n; ++i) out.value += cost(i, match[i]);
    out.value /= static_cast<double>(n);
    out.method = "assignment";
    return out;
  }
  if (n * m <= limits.lp_max_entries) {
    out.value = transport_lp(cost, a, b);
    out.method = "lp";
    return out;
  }
  std::vector<double> entries(cost.data(), cost.data() + cost.size());
  std::nth_element(entries.begin(), entries.begin() + entries.size() / 2, entries.end());
  double median = entries[entries.size() / 2];
  if (!(median > 0.0)) median = std::max(cost.maxCoeff(), 1e-300);
  out.value = sinkhorn(cost, a, b, limits.sinkhorn_scale * median, limits.sinkhorn_iterations);
  out.exact = false;
  out.method = "sinkhorn";
  return out;
}

}  // namespace mfgc
