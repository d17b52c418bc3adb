#pragma once

// Bayesian piecewise exponential survival models.
//
//   simple               lambda_j ~ Ga(a, b) independently, no covariates
//   frailty_gamma_chain  lambda_j | lambda_{j-1} ~ Ga(alpha, alpha / lambda_{j-1}), lambda_0 = 1
//   frailty_lognormal_rw xi_j = log lambda_j, xi_j | xi_{j-1} ~ N(xi_{j-1}, nu), xi_0 = 0
//
// The frailty families share the conditional hazard
//   h(t | x, z_i) = h0(t) exp(x' beta) z_i
// with z_i ~ Ga(eta, eta), eta ~ Ga(phi1, phi2), beta_k ~ N(0, sigma2_k).

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pexsurv/dataset.hpp"
#include "pexsurv/pex.hpp"

namespace pexsurv {

enum class Family { simple, frailty_gamma_chain, frailty_lognormal_rw };

std::string_view to_string(Family family);
/// Accepts "simple", "frailty-gamma", "frailty-lognormal".
Family parse_family(std::string_view name);
inline bool has_frailty(Family f) { return f != Family::simple; }

struct HyperParams {
  double gamma_shape = 0.01;  // simple family: lambda_j ~ Ga(gamma_shape, gamma_rate)
  double gamma_rate = 0.01;
  double chain_shape = 0.01;  // alpha_j, shared by every interval
  double rw_variance = 1e4;   // nu
  double eta_shape = 1e-3;    // phi1
  double eta_rate = 1e-3;     // phi2
  /// Prior variance per covariate coefficient; empty means 1e3 for all.
  std::vector<double> beta_variance;

  double beta_variance_for(std::size_t k) const {
    return beta_variance.empty() ? 1e3 : beta_variance.at(k);
  }
  /// Throws InvalidParamsError unless every value is strictly positive.
  void validate(std::size_t num_covariates) const;
};

struct ModelSpec {
  Family family = Family::simple;
  TimeGrid grid{std::vector<double>{0.0}};
  HyperParams hyper;
};

/// How censored records enter the likelihood.
enum class CensoringMode {
  augmented,  // current imputed time treated as a latent event time
  marginal,   // log S(censor_time)
};

struct ParamState {
  std::vector<double> rates;      // lambda_j > 0 while sampling
  std::vector<double> log_rates;  // xi_j = log lambda_j, kept in sync
  std::vector<double> beta;       // one coefficient per covariate (frailty families)
  std::vector<double> frailty;    // z_i per subject (frailty families)
  double eta = 1.0;
  std::vector<double> times;      // current time per record; imputed for censored ones

  void set_log_rate(std::size_t j, double y);
  void set_rate(std::size_t j, double rate);
  double kappa() const { return 1.0 / eta; }
};

struct SufficientStats {
  std::vector<double> events;       // d_j
  std::vector<double> exposure;     // R_j, weighted time at risk
};

/// Equally spaced grid a_j = max_time * j / m, j = 0..m-1.
TimeGrid default_grid(double max_time, int m);

/// Covariate and frailty multiplier exp(x' beta) z_i of record i (1 for simple).
double record_weight(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                     std::size_t i);
std::vector<double> record_weights(const ParamState& state, const ModelSpec& spec,
                                   const SurvivalDataset& data);

/// Time entering the likelihood for record i under the given mode.
double record_time(const ParamState& state, const SurvivalDataset& data, std::size_t i,
                   CensoringMode mode);
/// Whether record i contributes a density (vs a survival) term.
bool record_is_event(const SurvivalDataset& data, std::size_t i, CensoringMode mode);

/// Throws DomainError if the state does not fit the spec and data.
void validate_state(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data);

/// Per-interval event counts and weighted exposure; the lambda likelihood is
/// prod_j lambda_j^{d_j} exp(-lambda_j R_j).
SufficientStats sufficient_stats(const ParamState& state, const ModelSpec& spec,
                                 const SurvivalDataset& data, CensoringMode mode);
SufficientStats sufficient_stats(const std::vector<double>& weights, const ParamState& state,
                                 const ModelSpec& spec, const SurvivalDataset& data,
                                 CensoringMode mode);

/// Sum of per-record PE log densities / log survivals under the
/// subject-specific rates lambda_j exp(x' beta) z_i. Priors excluded.
double log_likelihood(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                      CensoringMode mode);

/// Log prior density of rates (on lambda for simple/gamma chain, on xi for the
/// lognormal walk), plus frailty, eta and beta terms for frailty families.
double log_prior(const ParamState& state, const ModelSpec& spec);

double joint_log_density(const ParamState& state, const ModelSpec& spec,
                         const SurvivalDataset& data, CensoringMode mode);

/// Poisson zeros-trick likelihood: per record sum_j [d_j log mu_j - mu_j]
/// with mu_j = overlap_j * theta_j. The offset constant C is omitted; it
/// cancels in every comparison.
double zeros_trick_loglik(const ParamState& state, const ModelSpec& spec,
                          const SurvivalDataset& data, CensoringMode mode);

struct InitialValues {
  std::optional<std::vector<double>> rates;
  std::optional<std::vector<double>> beta;
  std::optional<double> eta;
};

/// Prior-mean start (lambda = 1, beta = 0, eta = 1, z = 1) unless overridden.
/// Censored records start at censor_time plus the median residual life under
/// the initial subject-specific rates.
ParamState initial_state(const ModelSpec& spec, const SurvivalDataset& data,
                         const InitialValues& init = {});

/// Baseline-times-weight PE for record i.
PEParams record_params(const ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                       std::size_t i);

}  // namespace pexsurv
