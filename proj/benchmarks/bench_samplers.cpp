#include <benchmark/benchmark.h>

#include "cascop/random.hpp"
#include "cascop/samplers.hpp"
#include "cascop/splitting_law.hpp"

namespace {

void BM_EngineUniform(benchmark::State& state) {
  cascop::Engine eng(1);
  for (auto _ : state) benchmark::DoNotOptimize(eng.uniform());
}
BENCHMARK(BM_EngineUniform);

void BM_Normal(benchmark::State& state) {
  cascop::Engine eng(2);
  for (auto _ : state) benchmark::DoNotOptimize(cascop::normal(eng));
}
BENCHMARK(BM_Normal);

void BM_Gamma(benchmark::State& state) {
  cascop::Engine eng(3);
  const double shape = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(cascop::gamma_rv(eng, shape));
}
BENCHMARK(BM_Gamma)->Arg(5)->Arg(10)->Arg(250);

void BM_BinomialInversion(benchmark::State& state) {
  cascop::Engine eng(4);
  for (auto _ : state) benchmark::DoNotOptimize(cascop::binomial(eng, 1000, 0.01));
}
BENCHMARK(BM_BinomialInversion);

void BM_BinomialSplitting(benchmark::State& state) {
  cascop::Engine eng(5);
  const std::uint64_t n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(cascop::binomial(eng, n, 0.37));
}
BENCHMARK(BM_BinomialSplitting)->Arg(10000)->Arg(10000000);

void BM_Poisson(benchmark::State& state) {
  cascop::Engine eng(6);
  const double mean = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cascop::poisson(eng, mean));
}
BENCHMARK(BM_Poisson)->Arg(3)->Arg(300);

void BM_AtomStreamPd1Coverage(benchmark::State& state) {
  const auto spec = cascop::SplittingLawSpec::parse("pd1");
  cascop::Engine seeds(7);
  for (auto _ : state) {
    auto s = cascop::sample_atoms_until(spec, cascop::Engine(seeds()), 0.999);
    benchmark::DoNotOptimize(s.cumulative());
  }
}
BENCHMARK(BM_AtomStreamPd1Coverage);

}  // namespace

BENCHMARK_MAIN();
