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

#ifndef MFGC_IO_HPP_
#define MFGC_IO_HPP_

// CSV and key = value report emission, plus the readers used by `check`.
// Floats are written in shortest round-trip form, so output is
// byte-identical across runs that compute identical values.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mfgc/equilibrium.hpp"
#include "mfgc/ocp.hpp"

namespace mfgc {

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

using ReportEntries = std::vector<std::pair<std::string, std::string>>;

// price.csv: node, t, P_0 .. P_{m-1}
void write_price_csv(const std::string& path, const TimeGrid& grid,
                     const CouplingSignals& coupling);

// trajectories.csv: agent_id, node, t, gamma_*, v_*, p_*, nu_*; the control
// columns are empty at the last node.
void write_trajectories_csv(
    const std::string& path, const TimeGrid& grid,
    const std::vector<std::shared_ptr<const AgentTrajectory>>& agents, int n_control,
    int n_constraints);

// marginals.csv: node, t, particle, weight, x_* -- the state marginals m_t
// entering the coupling (one row per particle and node).
void write_marginals_csv(const std::string& path, const TimeGrid& grid,
                         const std::vector<DiscreteMeasure>& marginals);

// convergence.csv: iteration, price_change, marginal_d1_change,
// exploitability, mean_cost
void write_convergence_csv(const std::string& path, const ConvergenceTrace& trace);

// One "key=value" line per entry.
void write_report(const std::string& path, const ReportEntries& entries);

struct PriceTable {
  std::vector<double> t;
  std::vector<Vec> price;
};

struct TrajectoryTable {
  std::vector<double> t;  // node times of the first agent
  std::vector<int> agent_ids;
  std::vector<AgentTrajectory> agents;
};

// Throws ParseError (from config.hpp) with the line of the first problem.
PriceTable read_price_csv(const std::string& path);
// Returns one measure per node.
std::vector<DiscreteMeasure> read_marginals_csv(const std::string& path);
TrajectoryTable read_trajectories_csv(const std::string& path);

}  // namespace mfgc

#endif  // MFGC_IO_HPP_
