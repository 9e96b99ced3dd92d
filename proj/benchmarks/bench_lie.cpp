#include <benchmark/benchmark.h>

#include "geoflow/lie.hpp"
#include "geoflow/rng.hpp"

namespace {

void BM_MatExpSkew(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  geoflow::Rng rng(1);
  const auto s = geoflow::random_skew(n, rng).scaled(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoflow::exp_skew(s));
  }
}
BENCHMARK(BM_MatExpSkew)->Arg(2)->Arg(4)->Arg(5)->Arg(8)->Arg(16);

void BM_MatExpLargeNorm(benchmark::State& state) {
  geoflow::Rng rng(2);
  const auto s = geoflow::random_skew(8, rng).scaled(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoflow::mat_exp(s.matrix()));
  }
}
BENCHMARK(BM_MatExpLargeNorm)->Arg(1)->Arg(10)->Arg(100);

void BM_ProjectToRotation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  geoflow::Rng rng(3);
  const geoflow::Matrix a = geoflow::random_rotation(n, rng).matrix() * 1.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoflow::project_to_rotation(a));
  }
}
BENCHMARK(BM_ProjectToRotation)->Arg(4)->Arg(8);

}  // namespace
