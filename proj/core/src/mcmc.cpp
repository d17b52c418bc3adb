#include "pexsurv/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <thread>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string number_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Baseline cumulative hazard H0 at each record's current time.
std::vector<double> baseline_cum_hazards(const ParamState& state, const ModelSpec& spec,
                                         const SurvivalDataset& data, CensoringMode mode) {
  const PEParams baseline(spec.grid, state.rates);
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = baseline.cum_hazard(record_time(state, data, i, mode));
  }
  return out;
}

// Log full conditional of y = log lambda_j, Jacobian included.
double log_rate_conditional(double y, std::size_t j, const ParamState& state, const ModelSpec& spec,
                            const SufficientStats& stats) {
  const auto& h = spec.hyper;
  const std::size_t m = state.rates.size();
  const double d = stats.events[j];
  const double exposure = stats.exposure[j];
  switch (spec.family) {
    case Family::simple:
      // Ga(a, b) prior: (a - 1) y - b e^y, plus Jacobian y.
      return (h.gamma_shape + d) * y - (h.gamma_rate + exposure) * std::exp(y);
    case Family::frailty_gamma_chain: {
      const double alpha = h.chain_shape;
      const double prev = j == 0 ? 1.0 : state.rates[j - 1];
      double lp = (alpha + d) * y - (exposure + alpha / prev) * std::exp(y);
      if (j + 1 < m) lp += -alpha * y - alpha * state.rates[j + 1] * std::exp(-y);
      return lp;
    }
    case Family::frailty_lognormal_rw: {
      const double nu = h.rw_variance;
      const double prev = j == 0 ? 0.0 : state.log_rates[j - 1];
      double lp = d * y - 0.5 * (y - prev) * (y - prev) / nu;
      if (exposure > 0.0) lp -= exposure * std::exp(y);
      if (j + 1 < m) {
        const double next = state.log_rates[j + 1];
        lp -= 0.5 * (next - y) * (next - y) / nu;
      }
      return lp;
    }
  }
  return kNegInf;
}

}  // namespace

void McmcConfig::validate() const {
  if (n_chains < 1) throw InvalidParamsError("n_chains must be >= 1");
  if (burn_in < 0) throw InvalidParamsError("burn_in must be >= 0");
  if (n_iter < 1) throw InvalidParamsError("n_iter must be >= 1");
  if (thin < 1) throw InvalidParamsError("thin must be >= 1");
  if (!(slice.width > 0.0) || !std::isfinite(slice.width)) {
    throw InvalidParamsError("slice width must be > 0");
  }
  if (slice.max_steps < 1) throw InvalidParamsError("slice max_steps must be >= 1");
  for (double t : monitor_times) {
    if (!(t > 0.0)) throw InvalidParamsError("monitor times must be > 0");
  }
  for (double p : monitor_probs) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParamsError("monitor probabilities must lie in (0, 1)");
  }
}

std::size_t ChainStore::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return k;
  }
  throw SchemaError("chain has no column named '" + name + "'");
}

std::vector<std::string> monitored_names(const ModelSpec& spec, const SurvivalDataset& data,
                                         const McmcConfig& config) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.grid.size(); ++j) names.push_back("lambda[" + std::to_string(j + 1) + "]");
  if (has_frailty(spec.family)) {
    for (const auto& c : data.covariate_names) names.push_back("beta_" + c);
    names.emplace_back("eta");
    names.emplace_back("kappa");
    if (config.monitor_frailties) {
      for (std::size_t i = 0; i < data.num_subjects(); ++i) names.push_back("z[" + std::to_string(i + 1) + "]");
    }
  }
  for (double t : config.monitor_times) {
    const auto label = number_label(t);
    names.push_back("hazard[" + label + "]");
    names.push_back("cumhaz[" + label + "]");
    names.push_back("surv[" + label + "]");
  }
  for (double p : config.monitor_probs) names.push_back("quantile[" + number_label(p) + "]");
  return names;
}

std::vector<GammaParams> rate_conditionals(const ParamState& state, const ModelSpec& spec,
                                           const SurvivalDataset& data, CensoringMode mode) {
  if (spec.family != Family::simple) {
    throw InvalidParamsError("conjugate rate update applies to the simple family only");
  }
  const auto stats = sufficient_stats(state, spec, data, mode);
  std::vector<GammaParams> out;
  for (std::size_t j = 0; j < stats.events.size(); ++j) {
    out.push_back({spec.hyper.gamma_shape + stats.events[j], spec.hyper.gamma_rate + stats.exposure[j]});
  }
  return out;
}

void update_rates_conjugate(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                            CensoringMode mode, Rng& rng) {
  const auto cond = rate_conditionals(state, spec, data, mode);
  for (std::size_t j = 0; j < cond.size(); ++j) state.set_rate(j, rng.gamma(cond[j].shape, cond[j].rate));
}

void update_rates_slice(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                        CensoringMode mode, const SliceConfig& slice, Rng& rng) {
  const auto stats = sufficient_stats(state, spec, data, mode);
  for (std::size_t j = 0; j < state.rates.size(); ++j) {
    const auto target = [&](double y) { return log_rate_conditional(y, j, state, spec, stats); };
    state.set_log_rate(j, slice_sample(target, state.log_rates[j], slice, rng));
    if (!(state.rates[j] > 0.0)) state.set_rate(j, std::numeric_limits<double>::min());
  }
}

std::vector<GammaParams> frailty_conditionals(const ParamState& state, const ModelSpec& spec,
                                              const SurvivalDataset& data, CensoringMode mode) {
  if (!has_frailty(spec.family)) return {};
  const std::size_t n_subjects = state.frailty.size();
  std::vector<GammaParams> out(n_subjects, GammaParams{state.eta, state.eta});
  const auto cum = baseline_cum_hazards(state, spec, data, mode);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    const auto s = static_cast<std::size_t>(r.subject_id - 1);
    double lin = 0.0;
    for (std::size_t k = 0; k < state.beta.size(); ++k) lin += state.beta[k] * r.covariates[k];
    out[s].rate += std::exp(lin) * cum[i];
    if (record_is_event(data, i, mode)) out[s].shape += 1.0;
  }
  return out;
}

void update_frailties(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                      CensoringMode mode, Rng& rng) {
  const auto cond = frailty_conditionals(state, spec, data, mode);
  for (std::size_t s = 0; s < cond.size(); ++s) state.frailty[s] = rng.gamma(cond[s].shape, cond[s].rate);
}

void update_eta(ParamState& state, const ModelSpec& spec, const SliceConfig& slice, Rng& rng) {
  if (!has_frailty(spec.family)) return;
  double sum_z = 0.0;
  double sum_log_z = 0.0;
  for (double z : state.frailty) {
    sum_z += z;
    sum_log_z += std::log(z);
  }
  const double n = static_cast<double>(state.frailty.size());
  const double phi1 = spec.hyper.eta_shape;
  const double phi2 = spec.hyper.eta_rate;
  const auto target = [&](double eta) {
    return n * (eta * std::log(eta) - std::lgamma(eta)) + (eta - 1.0) * sum_log_z - eta * sum_z +
           (phi1 - 1.0) * std::log(eta) - phi2 * eta;
  };
  state.eta = slice_sample_positive(target, state.eta, slice, rng);
}

void update_beta(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                 CensoringMode mode, const SliceConfig& slice, Rng& rng) {
  if (!has_frailty(spec.family) || state.beta.empty()) return;
  const auto cum = baseline_cum_hazards(state, spec, data, mode);
  const std::size_t n = data.size();
  // scale_i = z_i H0(t_i); the record's hazard integral is scale_i exp(x_i' beta).
  std::vector<double> scale(n);
  std::vector<double> lin(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = data.records[i];
    scale[i] = state.frailty[static_cast<std::size_t>(r.subject_id - 1)] * cum[i];
    for (std::size_t k = 0; k < state.beta.size(); ++k) lin[i] += state.beta[k] * r.covariates[k];
  }
  for (std::size_t k = 0; k < state.beta.size(); ++k) {
    const double variance = spec.hyper.beta_variance_for(k);
    const double current = state.beta[k];
    double event_sum = 0.0;
    std::vector<double> offset(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = data.records[i].covariates[k];
      offset[i] = lin[i] - current * x;
      if (record_is_event(data, i, mode)) event_sum += x;
    }
    const auto target = [&](double b) {
      double lp = b * event_sum - 0.5 * b * b / variance;
      for (std::size_t i = 0; i < n; ++i) {
        lp -= scale[i] * std::exp(offset[i] + b * data.records[i].covariates[k]);
      }
      return lp;
    };
    const double next = slice_sample(target, current, slice, rng);
    state.beta[k] = next;
    for (std::size_t i = 0; i < n; ++i) lin[i] = offset[i] + next * data.records[i].covariates[k];
  }
}

void impute_censored(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                     Rng& rng) {
  const PEParams baseline(spec.grid, state.rates);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    if (r.event) continue;
    const double w = record_weight(state, spec, data, i);
    const PEParams params = w == 1.0 ? baseline : baseline.scaled(w);
    state.times[i] = params.sample(rng, TruncationBounds{r.censor_time, std::nullopt});
  }
}

void gibbs_sweep(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                 const McmcConfig& config, Rng& rng) {
  const CensoringMode mode = config.censoring_mode();
  if (mode == CensoringMode::augmented) impute_censored(state, spec, data, rng);
  if (spec.family == Family::simple && config.rate_update == RateUpdate::conjugate) {
    update_rates_conjugate(state, spec, data, mode, rng);
  } else {
    update_rates_slice(state, spec, data, mode, config.slice, rng);
  }
  update_frailties(state, spec, data, mode, rng);
  update_eta(state, spec, config.slice, rng);
  update_beta(state, spec, data, mode, config.slice, rng);
}

ChainStore run_chain(const ModelSpec& spec, const SurvivalDataset& data, const McmcConfig& config,
                     int chain_id) {
  config.validate();
  spec.hyper.validate(data.num_covariates());
  data.validate();

  ChainStore store;
  store.names = monitored_names(spec, data, config);
  store.draws.assign(store.names.size(), {});
  for (auto& col : store.draws) col.reserve(config.retained_draws());
  store.meta.chain_id = chain_id;
  store.meta.seed = config.chain_seed(chain_id);
  store.meta.family = spec.family;
  store.meta.config = config;

  const InitialValues init =
      static_cast<std::size_t>(chain_id) < config.inits.size() ? config.inits[chain_id] : InitialValues{};
  ParamState state = initial_state(spec, data, init);
  Rng rng(store.meta.seed);

  std::vector<double> row;
  row.reserve(store.names.size());
  const auto record = [&]() {
    row.clear();
    row.insert(row.end(), state.rates.begin(), state.rates.end());
    if (has_frailty(spec.family)) {
      row.insert(row.end(), state.beta.begin(), state.beta.end());
      row.push_back(state.eta);
      row.push_back(state.kappa());
      if (config.monitor_frailties) row.insert(row.end(), state.frailty.begin(), state.frailty.end());
    }
    if (!config.monitor_times.empty() || !config.monitor_probs.empty()) {
      const PEParams baseline(spec.grid, state.rates);
      for (double t : config.monitor_times) {
        const double cum = baseline.cum_hazard(t);
        row.push_back(baseline.hazard(t));
        row.push_back(cum);
        row.push_back(std::exp(-cum));
      }
      for (double p : config.monitor_probs) row.push_back(baseline.quantile(p));
    }
    for (std::size_t k = 0; k < row.size(); ++k) store.draws[k].push_back(row[k]);
  };

  const auto start = std::chrono::steady_clock::now();
  const std::size_t total = static_cast<std::size_t>(config.burn_in) + static_cast<std::size_t>(config.n_iter);
  for (std::size_t it = 0; it < total; ++it) {
    try {
      gibbs_sweep(state, spec, data, config, rng);
      if (it >= static_cast<std::size_t>(config.burn_in) &&
          (it - config.burn_in + 1) % static_cast<std::size_t>(config.thin) == 0) {
        record();
      }
    } catch (const std::exception& e) {
      throw ChainError(it, e.what());
    }
  }
  store.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return store;
}

std::vector<ChainStore> run_chains(const ModelSpec& spec, const SurvivalDataset& data,
                                   const McmcConfig& config) {
  config.validate();
  std::vector<ChainStore> chains;
  chains.reserve(static_cast<std::size_t>(config.n_chains));
  if (config.n_chains > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<ChainStore>> jobs;
    for (int c = 0; c < config.n_chains; ++c) {
      jobs.push_back(std::async(std::launch::async, [&, c] { return run_chain(spec, data, config, c); }));
    }
    for (auto& job : jobs) chains.push_back(job.get());
  } else {
    for (int c = 0; c < config.n_chains; ++c) chains.push_back(run_chain(spec, data, config, c));
  }
  return chains;
}

}  // namespace pexsurv
