#include <benchmark/benchmark.h>

#include "geoflow/constellation.hpp"
#include "geoflow/objective.hpp"
#include "geoflow/rng.hpp"

namespace {

void BM_PepValue(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = geoflow::make_hypercube(n);
  geoflow::Rng rng(4);
  const auto q = geoflow::random_rotation(n, rng);
  const geoflow::PepObjective obj(c, geoflow::NoiseLevel::from_snr_db(24));
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.value(q.matrix()));
  }
  state.SetItemsProcessed(state.iterations() * obj.pair_count());
}
BENCHMARK(BM_PepValue)->Arg(4)->Arg(5)->Arg(8);

void BM_PepValueAndGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = geoflow::make_hypercube(n);
  geoflow::Rng rng(5);
  const auto q = geoflow::random_rotation(n, rng);
  const geoflow::PepObjective obj(c, geoflow::NoiseLevel::from_snr_db(24),
                                  {8, static_cast<int>(state.range(1))});
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.value_and_gradient(q.matrix()));
  }
  state.SetItemsProcessed(state.iterations() * obj.pair_count());
}
BENCHMARK(BM_PepValueAndGradient)->Args({4, 1})->Args({5, 1})->Args({8, 1})->Args({8, 4});

void BM_PepGradientFd(benchmark::State& state) {
  const auto c = geoflow::make_hypercube(5);
  geoflow::Rng rng(6);
  const auto q = geoflow::random_rotation(5, rng);
  const geoflow::PepObjective obj(c, geoflow::NoiseLevel::from_snr_db(24));
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.gradient_fd(q.matrix(), 1e-5));
  }
}
BENCHMARK(BM_PepGradientFd);

}  // namespace
