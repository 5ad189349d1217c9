// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against the fused OpenMP kernels.

#include <pirhc/lq_oracle.hpp>
#include <pirhc/path_integral.hpp>
#include <pirhc/rhc.hpp>

#include <benchmark/benchmark.h>
#include <omp.h>

namespace {

using pirhc::Matrix;
using pirhc::Vector;

const pirhc::LqOracle& oracle() {
  static const pirhc::LqOracle o =
      pirhc::solve_riccati(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                           Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), 1.0, 1e-3);
  return o;
}

pirhc::PiConfig config(benchmark::State& state) {
  return pirhc::PiConfig{static_cast<std::size_t>(state.range(0)), 0.01, 0.05, 0.0};
}

void BM_EstimateControlReference(benchmark::State& state) {
  const auto model = oracle().model();
  const auto cost = oracle().cost();
  const pirhc::GammaCoupling gamma{1.0, 0.0, 1e-9};
  const auto cfg = config(state);
  const Vector x = Vector::Ones(1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pirhc::reference::estimate_control(model, cost, gamma, x, cfg, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}

void BM_EstimateControlParallel(benchmark::State& state) {
  const auto model = oracle().model();
  const auto cost = oracle().cost();
  const pirhc::GammaCoupling gamma{1.0, 0.0, 1e-9};
  const auto cfg = config(state);
  const Vector x = Vector::Ones(1);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pirhc::estimate_control(model, cost, gamma, x, cfg, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}

void BM_RealizationsReference(benchmark::State& state) {
  const auto model = oracle().model();
  const auto base = pirhc::oracle_controller(oracle());
  const pirhc::BaseControllerFactory factory = [&](std::size_t) { return base; };
  const pirhc::RhcConfig rhc{0.05, 0.01, 5.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pirhc::reference::run_realizations(model, factory, {}, rhc, Vector::Constant(1, 3.0), 1, state.range(0)));
  }
}

void BM_RealizationsParallel(benchmark::State& state) {
  const auto model = oracle().model();
  const auto base = pirhc::oracle_controller(oracle());
  const pirhc::BaseControllerFactory factory = [&](std::size_t) { return base; };
  const pirhc::RhcConfig rhc{0.05, 0.01, 5.0};
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pirhc::run_realizations(model, factory, {}, rhc, Vector::Constant(1, 3.0), 1, state.range(0)));
  }
}

}  // namespace

BENCHMARK(BM_EstimateControlReference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateControlParallel)
    ->ArgsProduct({{1000, 10000}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_RealizationsReference)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RealizationsParallel)->ArgsProduct({{100}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
