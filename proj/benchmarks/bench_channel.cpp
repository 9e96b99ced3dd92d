#include <benchmark/benchmark.h>

#include "geoflow/channel.hpp"
#include "geoflow/cyclotomic.hpp"

namespace {

void BM_MlDetect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = geoflow::make_hypercube(n);
  geoflow::Rng rng(7);
  const auto s = geoflow::sample_channel(n, geoflow::NoiseLevel::from_snr_db(20), rng);
  const geoflow::Vector y = s.fade.cwiseProduct(c.point(0)) + s.noise;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoflow::ml_detect(y, s.fade, c));
  }
}
BENCHMARK(BM_MlDetect)->Arg(2)->Arg(5)->Arg(8);

void BM_EstimateCer(benchmark::State& state) {
  const auto c = geoflow::make_hypercube(5);
  const auto q = geoflow::build_generator(geoflow::CyclotomicSpec(11)).matrix;
  geoflow::SimulationConfig cfg;
  cfg.snr_db_grid = {24.0};
  cfg.trials_per_point = 10000;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoflow::estimate_cer(c, q, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.trials_per_point);
}
BENCHMARK(BM_EstimateCer)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
