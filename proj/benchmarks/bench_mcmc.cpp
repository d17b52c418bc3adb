#include <benchmark/benchmark.h>

#include "pexsurv/mcmc.hpp"

namespace {

void BM_GibbsSweepKidney(benchmark::State& state) {
  const auto data = pexsurv::kidney_dataset();
  pexsurv::ModelSpec spec;
  spec.family = static_cast<pexsurv::Family>(state.range(0));
  spec.grid = pexsurv::default_grid(562.0, 10);
  pexsurv::McmcConfig config;
  auto params = pexsurv::initial_state(spec, data);
  pexsurv::Rng rng(1);
  for (auto _ : state) pexsurv::gibbs_sweep(params, spec, data, config, rng);
}
BENCHMARK(BM_GibbsSweepKidney)
    ->Arg(static_cast<int>(pexsurv::Family::simple))
    ->Arg(static_cast<int>(pexsurv::Family::frailty_gamma_chain))
    ->Arg(static_cast<int>(pexsurv::Family::frailty_lognormal_rw));

void BM_GibbsSweepSimulated(benchmark::State& state) {
  const pexsurv::PEParams truth(pexsurv::TimeGrid({0, 2, 3, 5}), {0.3, 0.6, 0.8, 1.3});
  pexsurv::Rng data_rng(7);
  std::vector<double> times(static_cast<std::size_t>(state.range(0)));
  for (double& t : times) t = truth.sample(data_rng);
  const auto data = pexsurv::dataset_from_times(times);
  pexsurv::ModelSpec spec;
  spec.grid = truth.grid();
  pexsurv::McmcConfig config;
  config.rate_update = pexsurv::RateUpdate::slice;
  auto params = pexsurv::initial_state(spec, data);
  pexsurv::Rng rng(1);
  for (auto _ : state) pexsurv::gibbs_sweep(params, spec, data, config, rng);
}
BENCHMARK(BM_GibbsSweepSimulated)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
