#include <benchmark/benchmark.h>

#include <cmath>

#include "cascop/cascade.hpp"
#include "cascop/regimes.hpp"

namespace {

const cascop::SplittingLawSpec& pd1() {
  static const auto spec = cascop::SplittingLawSpec::parse("pd1");
  return spec;
}

void BM_SimulateOccupancy(benchmark::State& state) {
  const std::uint64_t n = state.range(0);
  const int depth = state.range(1);
  cascop::Engine seeds(11);
  for (auto _ : state) {
    const auto stats = cascop::simulate_occupancy(pd1(), n, depth, cascop::root_key(seeds()));
    benchmark::DoNotOptimize(stats.back().occupancy.total_occupied);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SimulateOccupancy)->Args({1000, 8})->Args({100000, 10})->Args({162755, 24});

void BM_SimulateOccupancyPruned(benchmark::State& state) {
  cascop::SimulateOptions opts;
  opts.prune_below = 3;
  cascop::Engine seeds(12);
  for (auto _ : state) {
    const auto stats =
        cascop::simulate_occupancy(pd1(), 162755, 24, cascop::root_key(seeds()), opts);
    benchmark::DoNotOptimize(stats.back().occupancy.tail[2]);
  }
}
BENCHMARK(BM_SimulateOccupancyPruned);

// The W-estimation walk of the regime runs: depth 12, threshold from the
// default policy at theta = 2.
void BM_MassWalkW(benchmark::State& state) {
  const auto profile = cascop::build_profile(pd1());
  const double p_min = cascop::default_w_pmin(profile, 2.0, 12);
  cascop::Engine seeds(13);
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    struct CountingSink : cascop::MassTreeSink {
      std::uint64_t nodes = 0;
      double mass = 0.0;
      void node(int, double, double nlm) override {
        ++nodes;
        mass += nlm;
      }
      void dropped(int, double) override {}
    } sink;
    cascop::walk_mass_tree(pd1(), 12, p_min, cascop::root_key(seeds()), sink);
    benchmark::DoNotOptimize(sink.mass);
    nodes += sink.nodes;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(nodes));
}
BENCHMARK(BM_MassWalkW);

void BM_ExpandMassTreeStored(benchmark::State& state) {
  cascop::Engine seeds(14);
  for (auto _ : state) {
    const auto tree = cascop::expand_mass_tree(pd1(), 8, 1e-5, cascop::root_key(seeds()));
    benchmark::DoNotOptimize(tree.node_count);
  }
}
BENCHMARK(BM_ExpandMassTreeStored);

void BM_ShatteringGeneration(benchmark::State& state) {
  cascop::Engine seeds(15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cascop::shattering_generation(pd1(), state.range(0), 2, cascop::root_key(seeds()), 4096));
  }
}
BENCHMARK(BM_ShatteringGeneration)->Arg(10000)->Arg(100000);

}  // namespace
