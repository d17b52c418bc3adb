#pragma once

// Gibbs sampler for the piecewise exponential survival models.
//
// Sweep order per iteration:
//   impute censored times -> rates -> frailties -> eta -> beta
// Rates are drawn from their Gamma full conditional in the simple family
// (or by slice sampling on log lambda when requested) and by slice sampling
// on xi = log lambda in the frailty families.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pexsurv/model.hpp"
#include "pexsurv/random.hpp"
#include "pexsurv/slice.hpp"

namespace pexsurv {

enum class RateUpdate { conjugate, slice };

struct McmcConfig {
  int n_chains = 2;
  int burn_in = 1000;
  int n_iter = 2000;
  int thin = 1;
  std::uint64_t seed = 1;  // chain k runs with seed + k
  SliceConfig slice;
  RateUpdate rate_update = RateUpdate::conjugate;
  bool augment_censored = true;
  bool monitor_frailties = false;
  std::vector<double> monitor_times;  // baseline h, H, S recorded at each
  std::vector<double> monitor_probs;  // baseline quantiles recorded at each
  std::vector<InitialValues> inits;   // per chain; missing entries use defaults

  void validate() const;
  std::uint64_t chain_seed(int chain_id) const { return seed + static_cast<std::uint64_t>(chain_id); }
  std::size_t retained_draws() const { return static_cast<std::size_t>(n_iter / thin); }
  CensoringMode censoring_mode() const {
    return augment_censored ? CensoringMode::augmented : CensoringMode::marginal;
  }
};

struct ChainMetadata {
  int chain_id = 0;
  std::uint64_t seed = 0;
  Family family = Family::simple;
  McmcConfig config;
  double wall_seconds = 0.0;
};

/// Retained draws, one column per monitored scalar.
struct ChainStore {
  std::vector<std::string> names;
  std::vector<std::vector<double>> draws;
  ChainMetadata meta;

  std::size_t num_draws() const { return draws.empty() ? 0 : draws.front().size(); }
  /// Throws SchemaError for an unknown name.
  std::size_t index_of(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const { return draws[index_of(name)]; }

  bool same_draws(const ChainStore& other) const {
    return names == other.names && draws == other.draws;
  }
};

/// Names recorded by run_chain for this spec, data and config, in column order.
std::vector<std::string> monitored_names(const ModelSpec& spec, const SurvivalDataset& data,
                                         const McmcConfig& config);

struct GammaParams {
  double shape;
  double rate;
  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// Full conditional of lambda_j in the simple family: Gamma(a + d_j, b + R_j).
std::vector<GammaParams> rate_conditionals(const ParamState& state, const ModelSpec& spec,
                                           const SurvivalDataset& data, CensoringMode mode);

/// Full conditional of each z_i: Gamma(eta + d_i, eta + sum_k exp(x_ik' beta) H0(t_ik)).
std::vector<GammaParams> frailty_conditionals(const ParamState& state, const ModelSpec& spec,
                                              const SurvivalDataset& data, CensoringMode mode);

/// lambda_j ~ Gamma(a + d_j, b + R_j). Simple family only.
void update_rates_conjugate(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                            CensoringMode mode, Rng& rng);

/// Slice update of each log lambda_j under the family's rate prior.
void update_rates_slice(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                        CensoringMode mode, const SliceConfig& slice, Rng& rng);

/// z_i ~ Gamma(eta + d_i, eta + sum_k exp(x_ik' beta) H0(t_ik)).
void update_frailties(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                      CensoringMode mode, Rng& rng);

void update_eta(ParamState& state, const ModelSpec& spec, const SliceConfig& slice, Rng& rng);

void update_beta(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                 CensoringMode mode, const SliceConfig& slice, Rng& rng);

/// Redraws every censored time from its subject-specific PE truncated to
/// (censor_time, inf).
void impute_censored(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                     Rng& rng);

/// One full Gibbs sweep in the documented order.
void gibbs_sweep(ParamState& state, const ModelSpec& spec, const SurvivalDataset& data,
                 const McmcConfig& config, Rng& rng);

/// Runs one chain; errors are rethrown as ChainError with the iteration index.
ChainStore run_chain(const ModelSpec& spec, const SurvivalDataset& data, const McmcConfig& config,
                     int chain_id);

/// Runs config.n_chains independent chains, ordered by chain id.
std::vector<ChainStore> run_chains(const ModelSpec& spec, const SurvivalDataset& data,
                                   const McmcConfig& config);

}  // namespace pexsurv
