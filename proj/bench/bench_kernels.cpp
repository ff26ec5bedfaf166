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

// Serial reference vs OpenMP kernels on the gas storage demo.

#include <benchmark/benchmark.h>

#include "mfgc/equilibrium.hpp"
#include "mfgc/measures.hpp"

namespace {

using namespace mfgc;

struct Fixture {
  ModelSpec model;
  SolveConfig config;
  DiscreteMeasure atoms;
  ParticleMeasure kappa{TimeGrid(1.0, 1), MeasureKind::kStateCostate};
  CouplingSignals coupling;

  explicit Fixture(int agents) {
    model = build_gas_storage(GasStorageParams{});
    set_mean_congestion(model, 0.5);
    config.m0.lower = Vec::Constant(1, 0.2);
    config.m0.upper = Vec::Constant(1, 0.8);
    config.m0.count = agents;
    config.m0.seed = 12345;
    atoms = sample_initial(config.m0);
    kappa = initial_measure(model, atoms, config.grid(), 3);
    coupling = induced_coupling(model, kappa);
  }
};

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(1) ? ExecutionPolicy::kParallel : ExecutionPolicy::kSerial;
}

void BM_InducedCoupling(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(induced_coupling(f.model, f.kappa, {}, policy_of(state)));
  }
}

void BM_BestResponse(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  AgentOptions agent;
  agent.tol = 1e-8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_response(f.model, f.kappa, agent, policy_of(state)));
  }
}

void BM_Pushforward(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lagrangian_pushforward(f.kappa, f.coupling, f.model, 1e-12, policy_of(state)));
  }
}

// Second argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_InducedCoupling)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BestResponse)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Pushforward)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
