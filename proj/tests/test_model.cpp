#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "pexsurv/dataset.hpp"
#include "pexsurv/errors.hpp"
#include "pexsurv/model.hpp"

using namespace pexsurv;

namespace {

ModelSpec simple_spec(std::vector<double> cuts) {
  ModelSpec spec;
  spec.grid = TimeGrid(std::move(cuts));
  return spec;
}

ModelSpec kidney_spec(Family family) {
  ModelSpec spec;
  spec.family = family;
  spec.grid = default_grid(562.0, 10);
  return spec;
}

// Random strictly positive state that keeps the data's imputed times.
// Coefficients are scaled by each covariate's range so exp(x' beta) stays moderate.
void randomize(ParamState& s, const SurvivalDataset& data, Rng& rng) {
  for (std::size_t j = 0; j < s.rates.size(); ++j) s.set_log_rate(j, rng.normal(-4.0, 1.5));
  for (std::size_t k = 0; k < s.beta.size(); ++k) {
    double range = 1.0;
    for (const auto& r : data.records) range = std::max(range, std::abs(r.covariates[k]));
    s.beta[k] = rng.normal(0.0, 0.5 / range);
  }
  for (double& z : s.frailty) z = std::exp(rng.normal(0.0, 0.7));
  s.eta = std::exp(rng.normal(0.0, 1.0));
}

SurvivalDataset small_mixed() {
  return read_dataset_csv(
      "subject,replicate,time,status,x\n"
      "1,1,1.5,1,0\n"
      "1,2,2.5,0,0\n"
      "2,1,3.483,1,1\n"
      "2,2,0.7,1,1\n"
      "3,1,6.0,0,0.5\n");
}

}  // namespace

TEST_CASE("default_grid") {
  const auto g = default_grid(562.0, 10);
  REQUIRE(g.size() == 10);
  const double expected[] = {0, 56.2, 112.4, 168.6, 224.8, 281.0, 337.2, 393.4, 449.6, 505.8};
  for (std::size_t j = 0; j < 10; ++j) CHECK(g[j] == doctest::Approx(expected[j]).epsilon(1e-14));
  CHECK(default_grid(5.0, 1).cut_points().size() == 1);
  CHECK(default_grid(5.0, 1)[0] == 0.0);
  const auto four = default_grid(10.0, 4);
  CHECK((std::vector<double>(four.cut_points().begin(), four.cut_points().end()) ==
         std::vector<double>{0, 2.5, 5, 7.5}));
  CHECK_THROWS_AS(default_grid(10.0, 0), DomainError);
  CHECK_THROWS_AS(default_grid(0.0, 3), DomainError);
}

TEST_CASE("sufficient statistics of single events") {
  const auto spec = simple_spec({0, 2, 3, 5});
  {
    const auto data = dataset_from_times({1.5});
    const auto s = sufficient_stats(initial_state(spec, data), spec, data, CensoringMode::marginal);
    CHECK(s.events == std::vector<double>{1, 0, 0, 0});
    CHECK(s.exposure == std::vector<double>{1.5, 0, 0, 0});
  }
  {
    const auto data = dataset_from_times({3.483});
    const auto s = sufficient_stats(initial_state(spec, data), spec, data, CensoringMode::marginal);
    CHECK(s.events == std::vector<double>{0, 0, 1, 0});
    CHECK(s.exposure[0] == 2.0);
    CHECK(s.exposure[1] == 1.0);
    CHECK(std::abs(s.exposure[2] - 0.483) < 1e-15);
    CHECK(s.exposure[3] == 0.0);
    CHECK(std::abs(std::accumulate(s.exposure.begin(), s.exposure.end(), 0.0) - 3.483) < 1e-15);
  }
}

TEST_CASE("kidney event counts per interval") {
  const auto data = kidney_dataset();
  const auto spec = kidney_spec(Family::simple);
  const auto s = sufficient_stats(initial_state(spec, data), spec, data, CensoringMode::marginal);
  CHECK(s.events == std::vector<double>{30, 5, 9, 5, 1, 3, 0, 2, 0, 3});
}

TEST_CASE("bundled kidney data") {
  const auto data = kidney_dataset();
  CHECK(data.size() == 76);
  CHECK(data.num_subjects() == 38);
  CHECK(data.size() - data.num_events() == 18);
  CHECK(data.covariate_names == std::vector<std::string>{"sex", "age"});
  CHECK(data.max_event_time() == 562.0);
  CHECK_NOTHROW(data.validate());
}

TEST_CASE("time at risk is conserved") {
  Rng rng(8);
  const auto data = kidney_dataset();
  for (auto family : {Family::simple, Family::frailty_gamma_chain}) {
    const auto spec = kidney_spec(family);
    for (int c = 0; c < 20; ++c) {
      auto state = initial_state(spec, data);
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (!data.records[i].event) state.times[i] = data.records[i].censor_time + 300.0 * rng.uniform() + 1e-3;
      }
      const std::vector<double> ones(data.size(), 1.0);
      const auto s = sufficient_stats(ones, state, spec, data, CensoringMode::augmented);
      const double total_r = std::accumulate(s.exposure.begin(), s.exposure.end(), 0.0);
      const double total_t = std::accumulate(state.times.begin(), state.times.end(), 0.0);
      // Equal up to summation-order rounding.
      CHECK(std::abs(total_r - total_t) <= 64 * std::numeric_limits<double>::epsilon() * total_t);
      CHECK(std::accumulate(s.events.begin(), s.events.end(), 0.0) == double(data.size()));
      for (std::size_t i = 0; i < data.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < spec.grid.size(); ++j) sum += spec.grid.overlap(state.times[i], j);
        CHECK(std::abs(sum - state.times[i]) <= 8 * std::numeric_limits<double>::epsilon() * state.times[i]);
      }
    }
  }
}

TEST_CASE("joint log density of one exponential record") {
  auto spec = simple_spec({0});
  const auto data = dataset_from_times({0.8});
  auto state = initial_state(spec, data);
  state.set_rate(0, 1.7);
  const double a = spec.hyper.gamma_shape, b = spec.hyper.gamma_rate;
  const double prior = a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(1.7) - b * 1.7;
  const double expected = std::log(1.7) - 1.7 * 0.8 + prior;
  CHECK(std::abs(joint_log_density(state, spec, data, CensoringMode::marginal) - expected) < 1e-12);
}

TEST_CASE("unit frailty and zero beta reproduce the simple likelihood") {
  const auto data = kidney_dataset();
  auto simple = kidney_spec(Family::simple);
  auto frail = kidney_spec(Family::frailty_gamma_chain);
  Rng rng(3);
  for (int c = 0; c < 10; ++c) {
    auto s = initial_state(simple, data);
    auto f = initial_state(frail, data);
    for (std::size_t j = 0; j < s.rates.size(); ++j) {
      const double y = rng.normal(-4.0, 1.0);
      s.set_log_rate(j, y);
      f.set_log_rate(j, y);
    }
    CHECK(log_likelihood(s, simple, data, CensoringMode::marginal) ==
          log_likelihood(f, frail, data, CensoringMode::marginal));
  }
}

TEST_CASE("zeros trick per record") {
  const auto spec = simple_spec({0, 2, 3, 5});
  Rng rng(17);
  for (double t : {0.4, 2.0, 2.5, 3.483, 4.9, 7.5}) {
    const auto data = dataset_from_times({t});
    auto state = initial_state(spec, data);
    randomize(state, data, rng);
    const double direct = log_likelihood(state, spec, data, CensoringMode::marginal);
    const double zeros = zeros_trick_loglik(state, spec, data, CensoringMode::marginal);
    const double a_j = spec.grid.lower(interval_index(t, spec.grid));
    CHECK(std::abs((direct - zeros) - (-std::log(t - a_j))) < 1e-12);
  }
  const auto censored = read_dataset_csv("subject,replicate,time,status\n1,1,3.483,0\n");
  auto state = initial_state(spec, censored);
  const double zeros = zeros_trick_loglik(state, spec, censored, CensoringMode::marginal);
  const PEParams p(spec.grid, state.rates);
  CHECK(zeros == -p.cum_hazard(3.483));
  CHECK(std::abs(zeros - std::log(p.survival(3.483))) < 1e-15);
}

TEST_CASE("zeros trick differs from the direct likelihood by a data constant") {
  Rng rng(101);
  struct Case {
    ModelSpec spec;
    SurvivalDataset data;
  };
  std::vector<double> sim(300);
  const PEParams truth(TimeGrid({0, 2, 3, 5}), {0.3, 0.6, 0.8, 1.3});
  for (double& t : sim) t = truth.sample(rng);
  const Case cases[] = {
      {simple_spec({0, 2, 3, 5}), dataset_from_times(sim)},
      {kidney_spec(Family::frailty_gamma_chain), kidney_dataset()},
      {kidney_spec(Family::frailty_lognormal_rw), kidney_dataset()},
  };
  for (const auto& c : cases) {
    auto state = initial_state(c.spec, c.data);
    double reference = 0.0;
    for (int k = 0; k < 100; ++k) {
      randomize(state, c.data, rng);
      const double diff = log_likelihood(state, c.spec, c.data, CensoringMode::marginal) -
                          zeros_trick_loglik(state, c.spec, c.data, CensoringMode::marginal);
      if (k == 0) reference = diff;
      CHECK(std::abs(diff - reference) < 1e-10);
    }
  }
}

TEST_CASE("likelihood factorizes through the sufficient statistics") {
  const auto data = kidney_dataset();
  Rng rng(55);
  for (auto family : {Family::simple, Family::frailty_gamma_chain}) {
    const auto spec = kidney_spec(family);
    auto state = initial_state(spec, data);
    for (int c = 0; c < 20; ++c) {
      randomize(state, data, rng);
      const auto s = sufficient_stats(state, spec, data, CensoringMode::marginal);
      double factored = 0.0;
      for (std::size_t j = 0; j < s.events.size(); ++j) {
        factored += s.events[j] * state.log_rates[j] - state.rates[j] * s.exposure[j];
      }
      // lambda-free factor prod w^d over events.
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.records[i].event) factored += std::log(record_weight(state, spec, data, i));
      }
      const double direct = log_likelihood(state, spec, data, CensoringMode::marginal);
      CHECK(std::abs(factored - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("joint density stays finite under diffuse priors") {
  const auto data = kidney_dataset();
  Rng rng(4);
  for (auto family : {Family::frailty_gamma_chain, Family::frailty_lognormal_rw}) {
    const auto spec = kidney_spec(family);
    CHECK(spec.hyper.chain_shape == 0.01);
    CHECK(spec.hyper.rw_variance == 1e4);
    CHECK(spec.hyper.eta_shape == 1e-3);
    CHECK(spec.hyper.eta_rate == 1e-3);
    CHECK(spec.hyper.beta_variance_for(1) == 1e3);
    auto state = initial_state(spec, data);
    for (int c = 0; c < 50; ++c) {
      for (std::size_t j = 0; j < state.rates.size(); ++j) state.set_log_rate(j, rng.normal(-4.0, 6.0));
      for (double& z : state.frailty) z = std::exp(rng.normal(0.0, 4.0));
      state.eta = std::exp(rng.normal(0.0, 5.0));
      for (double& b : state.beta) b = rng.normal(0.0, 0.1);
      CHECK(std::isfinite(joint_log_density(state, spec, data, CensoringMode::augmented)));
      CHECK(std::isfinite(joint_log_density(state, spec, data, CensoringMode::marginal)));
    }
  }
}

TEST_CASE("invalid states and hyperparameters are rejected") {
  const auto data = kidney_dataset();
  const auto spec = kidney_spec(Family::frailty_gamma_chain);
  auto state = initial_state(spec, data);
  CHECK_NOTHROW(validate_state(state, spec, data));
  state.frailty[0] = 0.0;
  CHECK_THROWS_AS(joint_log_density(state, spec, data, CensoringMode::marginal), DomainError);
  state = initial_state(spec, data);
  state.eta = -1.0;
  CHECK_THROWS_AS(validate_state(state, spec, data), DomainError);
  state = initial_state(spec, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.records[i].event) state.times[i] = data.records[i].censor_time;
  }
  CHECK_THROWS_AS(validate_state(state, spec, data), DomainError);

  HyperParams h;
  CHECK_NOTHROW(h.validate(2));
  h.rw_variance = 0.0;
  CHECK_THROWS_AS(h.validate(2), InvalidParamsError);
  h = HyperParams{};
  h.beta_variance = {1.0};
  CHECK_THROWS_AS(h.validate(2), InvalidParamsError);
}

TEST_CASE("initial state places censored records beyond their censoring time") {
  const auto data = small_mixed();
  auto spec = simple_spec({0, 2, 3, 5});
  spec.family = Family::frailty_lognormal_rw;
  const auto s = initial_state(spec, data);
  CHECK(s.times[1] > 2.5);
  CHECK(s.times[4] > 6.0);
  CHECK(s.times[0] == 1.5);
  CHECK(s.kappa() == 1.0);
  CHECK_THROWS_AS(initial_state(spec, data, {std::vector<double>{1.0}, {}, {}}), InvalidParamsError);
}

TEST_CASE("family names") {
  for (auto f : {Family::simple, Family::frailty_gamma_chain, Family::frailty_lognormal_rw}) {
    CHECK(parse_family(to_string(f)) == f);
  }
  CHECK_THROWS_AS(parse_family("cox"), InvalidParamsError);
}

TEST_CASE("dataset CSV parsing") {
  const auto data = small_mixed();
  CHECK(data.size() == 5);
  CHECK(data.num_subjects() == 3);
  CHECK(data.num_events() == 3);
  CHECK_FALSE(data.records[1].time.has_value());
  CHECK(data.records[1].censor_time == 2.5);
  CHECK(data.records[4].covariates == std::vector<double>{0.5});

  std::ostringstream os;
  write_dataset_csv(os, data);
  CHECK(read_dataset_csv(os.str()) == data);

  auto line_of = [](const char* text) {
    try {
      read_dataset_csv(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("subject,replicate,time,status\n1,1,2,1\n1,2,abc,1\n") == 3);
  CHECK(line_of("subject,replicate,time,status\n1,1,2,1\n1,2,,1\n") == 3);
  CHECK(line_of("subject,replicate,time,status\n1,1,2,7\n") == 2);
  CHECK(line_of("subject,replicate,time,status\n1,1,2\n") == 2);
  CHECK(line_of("subj,replicate,time,status\n1,1,2,1\n") == 1);
  CHECK(line_of("subject,replicate,time,status\n1,1,-2,1\n") == 2);
  CHECK_THROWS_AS(read_dataset_csv("subject,replicate,time,status\n2,1,2,1\n"), SchemaError);
}
