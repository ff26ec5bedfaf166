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

#ifndef MFGC_TOOLS_COMMANDS_HPP_
#define MFGC_TOOLS_COMMANDS_HPP_

#include <optional>
#include <string>

#include "mfgc/config.hpp"

namespace mfgc::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitNotConverged = 2;

// Thread count from --threads, then MFGC_THREADS, then the config (0 keeps
// the OpenMP default).
int resolve_threads(std::optional<int> flag, int config_threads);

int run_solve(const RunConfig& config, int threads);

struct CheckOptions {
  std::string trajectories;
  std::string price;      // empty: price.csv next to the trajectories
  std::string marginals;  // empty: marginals.csv next to the trajectories if present
  double tol = 1e-6;
  int probes = 200;
};
int run_check(const RunConfig& config, const CheckOptions& options);

int run_uniqueness(const RunConfig& config, int starts, int threads);

struct GasDemoOverrides {
  std::optional<double> epsilon;
  std::optional<int> agents;
  std::optional<int> nt;
  std::optional<std::string> out;
};
int run_gas_demo(const GasDemoOverrides& overrides, int threads);

}  // namespace mfgc::cli

#endif  // MFGC_TOOLS_COMMANDS_HPP_
