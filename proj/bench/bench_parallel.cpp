// Copyright 2026 The diffmech Authors.
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

// Serial reference path versus OpenMP path for the Monte-Carlo kernels, plus
// single-run mechanism scaling. Before timing, the two paths are checked for
// bit-identical results.

#include <benchmark/benchmark.h>

#include <cstdio>
#include <cstdlib>

#include "diffmech/experiments.hpp"
#include "diffmech/mechanism.hpp"
#include "diffmech/properties.hpp"

using namespace diffmech;

namespace {

ExecutionOptions exec_for(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecutionOptions{Execution::kSerial, 1}
                             : ExecutionOptions{Execution::kParallel, 0};
}

const char* mode_label(const benchmark::State& state) {
  return state.range(0) == 0 ? "serial" : "parallel";
}

void BM_RatioTable(benchmark::State& state) {
  const std::int64_t sizes[] = {100, 1000};
  TableOptions o;
  o.trials = 200;
  o.master_seed = 1;
  o.exec = exec_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(ratio_table(sizes, default_item_rule, o));
  state.SetLabel(mode_label(state));
}
BENCHMARK(BM_RatioTable)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_DicSweep(benchmark::State& state) {
  DicSweepConfig config;
  config.max_nodes = 7;
  config.sample_count = 2000;
  config.master_seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(dic_sweep(config, exec_for(state)));
  state.SetLabel(mode_label(state));
}
BENCHMARK(BM_DicSweep)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_WorstCase(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(worst_case_star(10000, 2000, 1, exec_for(state)));
  state.SetLabel(mode_label(state));
}
BENCHMARK(BM_WorstCase)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_Mechanism(benchmark::State& state, TreeShape shape) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto tree = shape == TreeShape::kPath   ? path_tree(n)
                    : shape == TreeShape::kStar ? star_tree(n)
                                                : random_tree(n, rng);
  const auto values = ValuationProfile::uniform(n, rng);
  const auto keys = draw_tie_keys(n, rng);
  const MechanismParams params{std::max<std::int64_t>(1, static_cast<std::int64_t>(n) / 20), 0.01};
  for (auto _ : state) {
    const auto market = effective_market(tree);
    benchmark::DoNotOptimize(run_mechanism(market, values, params, keys));
  }
  state.SetComplexityN(state.range(0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Mechanism, path, TreeShape::kPath)
    ->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Mechanism, star, TreeShape::kStar)
    ->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Mechanism, random, TreeShape::kRandom)
    ->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

bool paths_agree() {
  const std::int64_t sizes[] = {50, 500};
  TableOptions o;
  o.trials = 100;
  o.master_seed = 9;
  o.exec = {Execution::kSerial, 1};
  const auto s = ratio_table(sizes, default_item_rule, o);
  o.exec = {Execution::kParallel, 4};
  const auto p = ratio_table(sizes, default_item_rule, o);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i].acc == p[i].acc)) return false;
  }
  const auto ws = worst_case_star(2000, 500, 3, {Execution::kSerial, 1});
  const auto wp = worst_case_star(2000, 500, 3, {Execution::kParallel, 4});
  return ws.ratio == wp.ratio && ws.mean_rd == wp.mean_rd;
}

}  // namespace

int main(int argc, char** argv) {
  if (!paths_agree()) {
    std::fprintf(stderr, "serial and parallel results differ\n");
    return 1;
  }
  std::fprintf(stderr, "serial and 4-worker results are bit-identical; %d worker(s) available\n",
               worker_count({}));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
