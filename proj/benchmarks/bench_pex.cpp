#include <benchmark/benchmark.h>

#include <vector>

#include "pexsurv/pex.hpp"

namespace {

pexsurv::PEParams make_params(int m) {
  std::vector<double> cuts, rates;
  for (int j = 0; j < m; ++j) {
    cuts.push_back(0.5 * j);
    rates.push_back(0.2 + 0.1 * (j % 7));
  }
  return pexsurv::PEParams(pexsurv::TimeGrid(cuts), rates);
}

void BM_CumHazard(benchmark::State& state) {
  const auto p = make_params(static_cast<int>(state.range(0)));
  double t = 0.013;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.cum_hazard(t));
    t = t > 0.5 * state.range(0) ? 0.013 : t + 0.37;
  }
}
BENCHMARK(BM_CumHazard)->Arg(4)->Arg(10)->Arg(100);

void BM_Quantile(benchmark::State& state) {
  const auto p = make_params(static_cast<int>(state.range(0)));
  double u = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.quantile(u));
    u = u + 0.0137 < 0.999 ? u + 0.0137 : 0.001;
  }
}
BENCHMARK(BM_Quantile)->Arg(4)->Arg(10)->Arg(100);

void BM_Sample(benchmark::State& state) {
  const auto p = make_params(4);
  pexsurv::Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(p.sample(rng));
}
BENCHMARK(BM_Sample);

void BM_SampleTruncated(benchmark::State& state) {
  const auto p = make_params(4);
  pexsurv::Rng rng(1);
  const pexsurv::TruncationBounds bounds{0.7, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(p.sample(rng, bounds));
}
BENCHMARK(BM_SampleTruncated);

}  // namespace
