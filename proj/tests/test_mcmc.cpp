#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pexsurv/diagnostics.hpp"
#include "pexsurv/errors.hpp"
#include "pexsurv/mcmc.hpp"
#include "pexsurv/slice.hpp"
#include "support/conditional_oracle.hpp"
#include "support/oracles.hpp"

using namespace pexsurv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Optional independent censoring at Uniform(0, censor_max).
SurvivalDataset s1_data(int n, std::uint64_t seed, double censor_max = kInf) {
  const PEParams truth(TimeGrid({0, 2, 3, 5}), {0.3, 0.6, 0.8, 1.3});
  Rng rng(seed);
  SurvivalDataset data;
  for (int i = 0; i < n; ++i) {
    SurvivalRecord r;
    r.subject_id = i + 1;
    const double t = truth.sample(rng);
    const double c = std::isfinite(censor_max) ? censor_max * rng.uniform() : kInf;
    if (t > c) {
      r.censor_time = c;
    } else {
      r.event = true;
      r.time = t;
    }
    data.records.push_back(r);
  }
  return data;
}

ModelSpec s1_spec() {
  ModelSpec spec;
  spec.grid = TimeGrid({0, 2, 3, 5});
  return spec;
}

// Posterior means of two runs agree within 3 Monte Carlo standard errors.
void check_agreement(const std::vector<ChainStore>& a, const std::vector<ChainStore>& b) {
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  for (std::size_t k = 0; k < sa.size(); ++k) {
    const double se = std::hypot(sa[k].sd / std::sqrt(sa[k].ess), sb[k].sd / std::sqrt(sb[k].ess));
    INFO(sa[k].name << ": " << sa[k].mean << " vs " << sb[k].mean << ", se " << se);
    CHECK(std::abs(sa[k].mean - sb[k].mean) < 3.0 * se);
  }
}

}  // namespace

TEST_CASE("slice sampler leaves a standard normal invariant") {
  Rng rng(1);
  const auto target = [](double x) { return -0.5 * x * x; };
  std::vector<double> xs;
  double x = 0.0;
  for (int i = 0; i < 100000; ++i) xs.push_back(x = slice_sample(target, x, {}, rng));
  CHECK(std::abs(oracle::mean(xs)) < 0.02);
  CHECK(std::abs(oracle::variance(xs) - 1.0) < 0.03);
}

TEST_CASE("slice sampler on the log scale recovers Gamma(3, 2)") {
  Rng rng(2);
  const auto target = [](double x) { return 2.0 * std::log(x) - 2.0 * x; };
  std::vector<double> xs;
  double x = 1.0;
  for (int i = 0; i < 100000; ++i) xs.push_back(x = slice_sample_positive(target, x, {}, rng));
  CHECK(std::abs(oracle::mean(xs) - 1.5) < 0.03 * 1.5);
  CHECK(std::abs(oracle::variance(xs) - 0.75) < 0.03 * 0.75);
}

TEST_CASE("slice sampler on a flat target stays inside the slice") {
  Rng rng(3);
  const auto target = [](double x) { return (x > 2.0 && x < 3.0) ? 0.0 : -kInf; };
  std::vector<int> bins(5, 0);
  double x = 2.5;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    x = slice_sample(target, x, {0.3, 50}, rng);
    REQUIRE(x > 2.0);
    REQUIRE(x < 3.0);
    ++bins[static_cast<int>((x - 2.0) * 5.0)];
  }
  for (int b : bins) CHECK(std::abs(b / double(n) - 0.2) < 0.01);
}

TEST_CASE("slice sampler rejects a non-finite start") {
  Rng rng(4);
  const auto target = [](double x) { return x > 0 ? 0.0 : -kInf; };
  CHECK_THROWS_AS(slice_sample(target, -1.0, {}, rng), InvariantViolation);
  CHECK_THROWS_AS(slice_sample([](double) { return std::nan(""); }, 0.0, {}, rng), InvariantViolation);
}

TEST_CASE("conjugate update without data draws from the prior") {
  auto spec = s1_spec();
  spec.hyper.gamma_shape = 2.0;
  spec.hyper.gamma_rate = 1.0;
  SurvivalDataset empty;
  ParamState state;
  state.rates.assign(4, 1.0);
  state.log_rates.assign(4, 0.0);
  const auto cond = rate_conditionals(state, spec, empty, CensoringMode::marginal);
  CHECK(cond[0].shape == 2.0);
  CHECK(cond[0].rate == 1.0);
  Rng rng(5);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    update_rates_conjugate(state, spec, empty, CensoringMode::marginal, rng);
    draws.push_back(state.rates[2]);
  }
  CHECK(std::abs(oracle::mean(draws) - 2.0) < 0.03 * 2.0);
  CHECK(std::abs(oracle::variance(draws) - 2.0) < 0.03 * 2.0);
}

TEST_CASE("conjugate rate update is for the simple family only") {
  auto spec = s1_spec();
  spec.family = Family::frailty_gamma_chain;
  const auto data = kidney_dataset();
  auto state = initial_state(spec, data);
  Rng rng(6);
  CHECK_THROWS_AS(update_rates_conjugate(state, spec, data, CensoringMode::marginal, rng),
                  InvalidParamsError);
}

TEST_CASE("rate conditional on S1 data") {
  const auto data = s1_data(1000, 1);
  const auto spec = s1_spec();
  const auto state = initial_state(spec, data);
  const auto cond = rate_conditionals(state, spec, data, CensoringMode::marginal);
  const auto stats = sufficient_stats(state, spec, data, CensoringMode::marginal);
  CHECK(cond[0].mean() == doctest::Approx((0.01 + stats.events[0]) / (0.01 + stats.exposure[0])));
  CHECK(std::abs(cond[0].mean() - 0.3) < 0.05);
}

TEST_CASE("Gamma full conditionals match numerically normalized conditionals") {
  Rng rng(77);
  for (int c = 0; c < 6; ++c) {
    const auto simple = oracle::random_configuration(rng, Family::simple);
    CHECK(oracle::rate_conditional_error(simple, CensoringMode::marginal) < 1e-4);
    CHECK(oracle::rate_conditional_error(simple, CensoringMode::augmented) < 1e-4);
    const auto frail = oracle::random_configuration(
        rng, c % 2 ? Family::frailty_gamma_chain : Family::frailty_lognormal_rw);
    CHECK(oracle::frailty_conditional_error(frail, CensoringMode::marginal, 3) < 1e-4);
    CHECK(oracle::frailty_conditional_error(frail, CensoringMode::augmented, 3) < 1e-4);
  }
}

TEST_CASE("frailty conditional with negligible exposure is the prior") {
  ModelSpec spec = s1_spec();
  spec.family = Family::frailty_gamma_chain;
  const auto data = read_dataset_csv("subject,replicate,time,status\n1,1,1e-9,0\n2,1,1.0,1\n");
  auto state = initial_state(spec, data);
  state.eta = 0.7;
  const auto cond = frailty_conditionals(state, spec, data, CensoringMode::marginal);
  CHECK(cond[0].shape == 0.7);
  CHECK(cond[0].rate == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(cond[1].shape == 1.7);
}

TEST_CASE("imputed times exceed their censoring times") {
  const auto data = kidney_dataset();
  ModelSpec spec;
  spec.family = Family::frailty_lognormal_rw;
  spec.grid = default_grid(562.0, 10);
  auto state = initial_state(spec, data);
  for (std::size_t j = 0; j < 10; ++j) state.set_rate(j, 0.01);
  Rng rng(9);
  for (int it = 0; it < 200; ++it) {
    impute_censored(state, spec, data, rng);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.records[i].event) {
        CHECK(state.times[i] == *data.records[i].time);
      } else {
        CHECK(state.times[i] > data.records[i].censor_time);
      }
    }
  }
}

TEST_CASE("imputation under constant rates is memoryless") {
  ModelSpec spec;
  spec.family = Family::frailty_gamma_chain;
  spec.grid = TimeGrid({0, 1, 2.5, 4});
  // One censored record, censored inside the grid and beyond the last cut.
  for (double censor : {1.7, 9.0}) {
    SurvivalDataset data;
    data.covariate_names = {"x"};
    SurvivalRecord r;
    r.subject_id = 1;
    r.censor_time = censor;
    r.covariates = {1.0};
    data.records.push_back(r);
    auto state = initial_state(spec, data);
    for (std::size_t j = 0; j < 4; ++j) state.set_rate(j, 0.4);
    state.beta = {0.3};
    state.frailty = {1.6};
    const double rate = 0.4 * std::exp(0.3) * 1.6;
    Rng rng(10);
    std::vector<double> excess(20000);
    for (double& e : excess) {
      impute_censored(state, spec, data, rng);
      REQUIRE(std::isfinite(state.times[0]));
      e = state.times[0] - censor;
    }
    const auto cdf = [&](double x) { return -std::expm1(-rate * x); };
    CHECK(oracle::ks_statistic(excess, cdf) < oracle::ks_critical(excess.size(), 0.001));
  }
}

TEST_CASE("chains are deterministic given the seed") {
  const auto data = kidney_dataset();
  ModelSpec spec;
  spec.family = Family::frailty_gamma_chain;
  spec.grid = default_grid(562.0, 10);
  McmcConfig config;
  config.burn_in = 50;
  config.n_iter = 100;
  config.seed = 12;
  config.monitor_frailties = true;
  config.monitor_times = {100.0};
  config.monitor_probs = {0.5};
  const auto a = run_chain(spec, data, config, 0);
  const auto b = run_chain(spec, data, config, 0);
  CHECK(a.same_draws(b));
  CHECK(a.meta.seed == 12);
  CHECK_FALSE(a.same_draws(run_chain(spec, data, config, 1)));
  CHECK(a.names == monitored_names(spec, data, config));
  for (std::size_t k = 0; k < a.draws[a.index_of("eta")].size(); ++k) {
    CHECK(a.column("kappa")[k] == 1.0 / a.column("eta")[k]);
  }
  CHECK_THROWS_AS(a.index_of("nope"), SchemaError);
}

TEST_CASE("retained draws follow burn-in and thinning") {
  const auto data = s1_data(50, 2);
  McmcConfig config;
  config.burn_in = 7;
  config.n_iter = 101;
  config.thin = 4;
  config.n_chains = 3;
  const auto chains = run_chains(s1_spec(), data, config);
  REQUIRE(chains.size() == 3);
  for (const auto& c : chains) {
    CHECK(c.num_draws() == 25);
    for (const auto& col : c.draws) CHECK(col.size() == config.retained_draws());
  }
  CHECK(chains[2].meta.chain_id == 2);

  McmcConfig bad;
  bad.thin = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidParamsError);
  bad = McmcConfig{};
  bad.monitor_probs = {1.0};
  CHECK_THROWS_AS(bad.validate(), InvalidParamsError);
}

TEST_CASE("conjugate and slice rate updates agree in distribution") {
  const auto data = s1_data(200, 3);
  McmcConfig config;
  config.burn_in = 500;
  config.n_iter = 4000;
  config.seed = 21;
  const auto conjugate = run_chains(s1_spec(), data, config);
  config.rate_update = RateUpdate::slice;
  config.seed = 31;
  check_agreement(conjugate, run_chains(s1_spec(), data, config));
}

TEST_CASE("augmented and marginal censoring agree in distribution") {
  const auto data = s1_data(200, 4, 8.0);
  REQUIRE(data.num_events() < data.size());
  McmcConfig config;
  config.burn_in = 500;
  config.n_iter = 4000;
  config.seed = 41;
  const auto augmented = run_chains(s1_spec(), data, config);
  config.augment_censored = false;
  config.seed = 51;
  check_agreement(augmented, run_chains(s1_spec(), data, config));
}
