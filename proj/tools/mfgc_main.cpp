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

// Command-line entry point: mfgc solve | check | uniqueness | demo gas.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mfgc/error.hpp"

int main(int argc, char** argv) {
  using namespace mfgc;
  CLI::App app{"Lagrangian equilibria of mean field games of controls"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;

  auto* solve = app.add_subcommand("solve", "Run fictitious play and write CSV output");
  solve->add_option("--config", config_path, "Configuration file")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  solve->add_option("--threads", threads, "OpenMP threads (fallback: MFGC_THREADS)")
      ->check(CLI::NonNegativeNumber);

  cli::CheckOptions check_opts;
  auto* check = app.add_subcommand(
      "check", "Check assumptions and certify a trajectory file with PMP residuals");
  check->add_option("--config", config_path, "Configuration file")->required();
  check->add_option("--trajectories", check_opts.trajectories, "trajectories.csv")->required();
  check->add_option("--price", check_opts.price, "price.csv (default: next to trajectories)");
  check->add_option("--marginals", check_opts.marginals,
                    "marginals.csv (default: next to trajectories when present)");
  check->add_option("--tol", check_opts.tol, "Certification tolerance")
      ->check(CLI::PositiveNumber);

  int starts = 3;
  auto* uniq = app.add_subcommand("uniqueness", "Solve from several starts and compare");
  uniq->add_option("--config", config_path, "Configuration file")->required();
  uniq->add_option("--starts", starts, "Number of starts (>= 2)")->check(CLI::Range(2, 1000));
  uniq->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  uniq->add_option("--threads", threads, "OpenMP threads")->check(CLI::NonNegativeNumber);

  cli::GasDemoOverrides demo_opts;
  auto* demo = app.add_subcommand("demo", "Built-in demonstrations");
  demo->require_subcommand(1);
  auto* gas = demo->add_subcommand("gas", "Gas storage equilibrium with default parameters");
  gas->add_option("--epsilon", demo_opts.epsilon, "Smoothing parameter");
  gas->add_option("--agents", demo_opts.agents, "Number of initial atoms");
  gas->add_option("--nt", demo_opts.nt, "Time intervals");
  gas->add_option("--out", demo_opts.out, "Output directory");
  gas->add_option("--threads", threads, "OpenMP threads")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gas) {
      return cli::run_gas_demo(demo_opts, cli::resolve_threads(threads, 0));
    }
    RunConfig config = parse_config(config_path);
    if (out_dir) config.output.directory = *out_dir;
    const int n_threads = cli::resolve_threads(threads, config.threads);
    if (*solve) return cli::run_solve(config, n_threads);
    if (*check) return cli::run_check(config, check_opts);
    if (*uniq) return cli::run_uniqueness(config, starts, n_threads);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitFailure;
  }
  return cli::kExitFailure;
}
