#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pexsurv/mcmc.hpp"

namespace pexsurv {

/// Shortest window of ceil(mass * n) sorted draws; ties go to the lowest
/// window. Needs at least 10 draws.
std::pair<double, double> hpd_interval(std::span<const double> draws, double mass);

struct EssResult {
  double ess = 0.0;
  bool zero_variance = false;
};

/// n / (1 + 2 sum rho_k) with the autocorrelation sum cut by Geyer's initial
/// positive sequence; capped at n. Needs at least 100 draws.
EssResult effective_sample_size(std::span<const double> draws);

struct Summary {
  std::string name;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double hpd_low = 0.0;
  double hpd_high = 0.0;
  double ess = 0.0;
  bool ess_zero_variance = false;
};

/// Pools all chains for mean/median/sd/HPD; ESS from the first chain only.
/// Throws SchemaError if the chains monitor different quantities.
std::vector<Summary> summarize(std::span<const ChainStore> chains, double mass = 0.95);

const Summary& find_summary(const std::vector<Summary>& table, const std::string& name);

void write_summary_csv(std::ostream& out, const std::vector<Summary>& table);
/// Aligned plain-text table: Parameter, Mean, Median, S.D., HPD, ESS.
std::string format_summary_table(const std::vector<Summary>& table);

}  // namespace pexsurv
