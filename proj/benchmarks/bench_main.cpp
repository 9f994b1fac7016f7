#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ctrlhier/metrics.hpp"
#include "ctrlhier/nullmodel.hpp"
#include "ctrlhier/powerlaw.hpp"
#include "ctrlhier/synthgen.hpp"

using namespace ctrlhier;

namespace {

ControlTree labelled_tree(std::size_t n) {
  const auto scaffold = gen_tree({topology::Preferential{n, 1.0}, 11});
  const std::vector<std::string> labels{"A", "B", "C", "D", "E"};
  return assign_labels(scaffold, LabelKind::country,
                       {labelling::Markov{0.6, uniform_distribution(LabelKind::country, labels)}, 3});
}

void BM_Bootstrap(benchmark::State& state) {
  const auto tree = labelled_tree(static_cast<std::size_t>(state.range(0)));
  BootstrapOptions opts;
  opts.replications = 1000;
  opts.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_perfect_tree(tree, LabelKind::country, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_Bootstrap)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FitPowerLaw(benchmark::State& state) {
  const auto xs = sample_power_law(1.7, 2, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(fit_power_law(xs));
}
BENCHMARK(BM_FitPowerLaw)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GenTree(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(gen_tree({topology::Preferential{static_cast<std::size_t>(state.range(0)), 1.0}, 9}));
}
BENCHMARK(BM_GenTree)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PerfectTree(benchmark::State& state) {
  const auto tree = labelled_tree(100000);
  for (auto _ : state) benchmark::DoNotOptimize(perfect_tree_statistic(tree, LabelKind::country));
}
BENCHMARK(BM_PerfectTree)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
