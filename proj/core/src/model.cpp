#include "pexsurv/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double linear_predictor(const ParamState& state, const SurvivalRecord& r) {
  double eta = 0.0;
  for (std::size_t k = 0; k < state.beta.size(); ++k) eta += state.beta[k] * r.covariates[k];
  return eta;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::simple:
      return "simple";
    case Family::frailty_gamma_chain:
      return "frailty-gamma";
    case Family::frailty_lognormal_rw:
      return "frailty-lognormal";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "simple") return Family::simple;
  if (name == "frailty-gamma") return Family::frailty_gamma_chain;
  if (name == "frailty-lognormal") return Family::frailty_lognormal_rw;
  throw InvalidParamsError("unknown model family '" + std::string(name) + "'");
}

void HyperParams::validate(std::size_t num_covariates) const {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InvalidParamsError(std::string("hyperparameter ") + what + " must be > 0");
    }
  };
  positive(gamma_shape, "gamma_shape");
  positive(gamma_rate, "gamma_rate");
  positive(chain_shape, "chain_shape");
  positive(rw_variance, "rw_variance");
  positive(eta_shape, "eta_shape");
  positive(eta_rate, "eta_rate");
  if (!beta_variance.empty() && beta_variance.size() != num_covariates) {
    throw InvalidParamsError("beta_variance needs one entry per covariate");
  }
  for (double v : beta_variance) positive(v, "beta_variance");
}

void ParamState::set_log_rate(std::size_t j, double y) {
  log_rates[j] = y;
  rates[j] = std::exp(y);
}

void ParamState::set_rate(std::size_t j, double rate) {
  rates[j] = rate;
  log_rates[j] = std::log(rate);
}

TimeGrid default_grid(double max_time, int m) {
  if (m < 1) throw DomainError("number of intervals must be >= 1");
  if (!(max_time > 0.0) || !std::isfinite(max_time)) throw DomainError("max_time must be > 0");
  std::vector<double> cuts(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) cuts[static_cast<std::size_t>(j)] = max_time * j / m;
  return TimeGrid(std::move(cuts));
}

double record_weight(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                     std::size_t i) {
  if (!has_frailty(spec.family)) return 1.0;
  const auto& r = data.records[i];
  return std::exp(linear_predictor(state, r)) *
         state.frailty[static_cast<std::size_t>(r.subject_id - 1)];
}

std::vector<double> record_weights(const ParamState& state, const ModelSpec& spec,
                                   const SurvivalDataset& data) {
  std::vector<double> w(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) w[i] = record_weight(state, spec, data, i);
  return w;
}

double record_time(const ParamState& state, const SurvivalDataset& data, std::size_t i,
                   CensoringMode mode) {
  const auto& r = data.records[i];
  if (r.event) return *r.time;
  return mode == CensoringMode::augmented ? state.times[i] : r.censor_time;
}

bool record_is_event(const SurvivalDataset& data, std::size_t i, CensoringMode mode) {
  return data.records[i].event || mode == CensoringMode::augmented;
}

void validate_state(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data) {
  const std::size_t m = spec.grid.size();
  if (state.rates.size() != m || state.log_rates.size() != m) {
    throw DomainError("state has the wrong number of rates");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(state.rates[j] > 0.0) || !std::isfinite(state.rates[j])) {
      throw DomainError("rate " + std::to_string(j) + " must be positive and finite");
    }
  }
  if (state.times.size() != data.size()) throw DomainError("state has the wrong number of times");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    if (!r.event && !(state.times[i] > r.censor_time)) {
      throw DomainError("imputed time of record " + std::to_string(i) +
                        " does not exceed its censoring time");
    }
  }
  if (!has_frailty(spec.family)) return;
  if (state.beta.size() != data.num_covariates()) throw DomainError("beta has the wrong length");
  for (double b : state.beta) {
    if (!std::isfinite(b)) throw DomainError("beta must be finite");
  }
  if (state.frailty.size() != data.num_subjects()) throw DomainError("frailty has the wrong length");
  for (double z : state.frailty) {
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("frailties must be positive");
  }
  if (!(state.eta > 0.0) || !std::isfinite(state.eta)) throw DomainError("eta must be positive");
}

SufficientStats sufficient_stats(const std::vector<double>& weights, const ParamState& state,
                                 const ModelSpec& spec, const SurvivalDataset& data,
                                 CensoringMode mode) {
  const std::size_t m = spec.grid.size();
  SufficientStats s{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = record_time(state, data, i, mode);
    const std::size_t last = interval_index(t, spec.grid);
    for (std::size_t j = 0; j <= last; ++j) s.exposure[j] += weights[i] * spec.grid.overlap(t, j);
    if (record_is_event(data, i, mode)) s.events[last] += 1.0;
  }
  return s;
}

SufficientStats sufficient_stats(const ParamState& state, const ModelSpec& spec,
                                 const SurvivalDataset& data, CensoringMode mode) {
  return sufficient_stats(record_weights(state, spec, data), state, spec, data, mode);
}

double log_likelihood(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                      CensoringMode mode) {
  const PEParams baseline(spec.grid, state.rates);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = record_time(state, data, i, mode);
    const double w = record_weight(state, spec, data, i);
    const double cum = w * baseline.cum_hazard(t);
    if (record_is_event(data, i, mode)) {
      total += std::log(w * baseline.hazard(t)) - cum;
    } else {
      total -= cum;
    }
  }
  return total;
}

double log_prior(const ParamState& state, const ModelSpec& spec) {
  const auto& h = spec.hyper;
  const std::size_t m = state.rates.size();
  double lp = 0.0;
  switch (spec.family) {
    case Family::simple:
      for (double lam : state.rates) lp += log_gamma_pdf(lam, h.gamma_shape, h.gamma_rate);
      return lp;
    case Family::frailty_gamma_chain: {
      double prev = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        lp += log_gamma_pdf(state.rates[j], h.chain_shape, h.chain_shape / prev);
        prev = state.rates[j];
      }
      break;
    }
    case Family::frailty_lognormal_rw: {
      double prev = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        lp += log_normal_pdf(state.log_rates[j], prev, h.rw_variance);
        prev = state.log_rates[j];
      }
      break;
    }
  }
  for (double z : state.frailty) lp += log_gamma_pdf(z, state.eta, state.eta);
  lp += log_gamma_pdf(state.eta, h.eta_shape, h.eta_rate);
  for (std::size_t k = 0; k < state.beta.size(); ++k) {
    lp += log_normal_pdf(state.beta[k], 0.0, h.beta_variance_for(k));
  }
  return lp;
}

double joint_log_density(const ParamState& state, const ModelSpec& spec,
                         const SurvivalDataset& data, CensoringMode mode) {
  validate_state(state, spec, data);
  return log_likelihood(state, spec, data, mode) + log_prior(state, spec);
}

double zeros_trick_loglik(const ParamState& state, const ModelSpec& spec,
                          const SurvivalDataset& data, CensoringMode mode) {
  const std::size_t m = spec.grid.size();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = record_time(state, data, i, mode);
    const double w = record_weight(state, spec, data, i);
    const std::size_t event_interval =
        record_is_event(data, i, mode) ? interval_index(t, spec.grid) : m;
    double loglik = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double mu = spec.grid.overlap(t, j) * state.rates[j] * w;
      // log dpois(d, mu) with d in {0, 1}
      loglik += (j == event_interval ? std::log(mu) : 0.0) - mu;
    }
    total += loglik;
  }
  return total;
}

PEParams record_params(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                       std::size_t i) {
  return PEParams(spec.grid, state.rates).scaled(record_weight(state, spec, data, i));
}

ParamState initial_state(const ModelSpec& spec, const SurvivalDataset& data,
                         const InitialValues& init) {
  const std::size_t m = spec.grid.size();
  ParamState s;
  s.rates.assign(m, 1.0);
  if (init.rates) {
    if (init.rates->size() != m) throw InvalidParamsError("initial rates need one value per interval");
    s.rates = *init.rates;
  }
  s.log_rates.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(s.rates[j] > 0.0)) throw InvalidParamsError("initial rates must be > 0");
    s.log_rates[j] = std::log(s.rates[j]);
  }
  if (has_frailty(spec.family)) {
    s.beta.assign(data.num_covariates(), 0.0);
    if (init.beta) {
      if (init.beta->size() != s.beta.size()) throw InvalidParamsError("initial beta has the wrong length");
      s.beta = *init.beta;
    }
    s.frailty.assign(data.num_subjects(), 1.0);
    s.eta = init.eta.value_or(1.0);
    if (!(s.eta > 0.0)) throw InvalidParamsError("initial eta must be > 0");
  }
  s.times.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    if (r.event) {
      s.times[i] = *r.time;
      continue;
    }
    // Median of the residual life beyond censor_time: H^{-1}(H(c) + log 2).
    const PEParams p = record_params(s, spec, data, i);
    const double t = p.inverse_cum_hazard(p.cum_hazard(r.censor_time) + std::numbers::ln2);
    s.times[i] = t > r.censor_time ? t : std::nextafter(r.censor_time, kInf);
  }
  return s;
}

}  // namespace pexsurv
