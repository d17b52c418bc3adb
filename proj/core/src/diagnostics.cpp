#include "pexsurv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

double median_of_sorted(const std::vector<double>& s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

std::pair<double, double> hpd_sorted(const std::vector<double>& sorted, double mass) {
  const std::size_t n = sorted.size();
  const auto k = std::min(n, static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n))));
  std::size_t best = 0;
  double best_width = sorted[k - 1] - sorted[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double width = sorted[i + k - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {sorted[best], sorted[best + k - 1]};
}

}  // namespace

std::pair<double, double> hpd_interval(std::span<const double> draws, double mass) {
  if (draws.size() < 10) throw InsufficientDataError("HPD interval needs at least 10 draws");
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("HPD mass must lie in (0, 1)");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  return hpd_sorted(sorted, mass);
}

EssResult effective_sample_size(std::span<const double> draws) {
  const std::size_t n = draws.size();
  if (n < 100) throw InsufficientDataError("effective sample size needs at least 100 draws");
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = draws[t] - mean;

  const auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += centered[t] * centered[t + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) return {0.0, true};

  // tau = -1 + 2 sum_m (rho_{2m} + rho_{2m+1}) over the initial positive pairs.
  double pair_sum = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair_sum += pair;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  const double ess = tau > 0.0 ? static_cast<double>(n) / tau : static_cast<double>(n);
  return {std::min(ess, static_cast<double>(n)), false};
}

std::vector<Summary> summarize(std::span<const ChainStore> chains, double mass) {
  if (chains.empty()) throw InsufficientDataError("summarize needs at least one chain");
  const auto& names = chains.front().names;
  for (const auto& c : chains) {
    if (c.names != names) throw SchemaError("chains monitor different quantities");
  }
  std::vector<Summary> table;
  table.reserve(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::vector<double> pooled;
    for (const auto& c : chains) pooled.insert(pooled.end(), c.draws[k].begin(), c.draws[k].end());
    if (pooled.size() < 10) throw InsufficientDataError("summary needs at least 10 pooled draws");
    Summary s;
    s.name = names[k];
    const double n = static_cast<double>(pooled.size());
    s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : pooled) ss += (x - s.mean) * (x - s.mean);
    s.sd = pooled.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    s.median = median_of_sorted(pooled);
    std::tie(s.hpd_low, s.hpd_high) = hpd_sorted(pooled, mass);
    const auto& first = chains.front().draws[k];
    if (first.size() >= 100) {
      const auto ess = effective_sample_size(first);
      s.ess = ess.ess;
      s.ess_zero_variance = ess.zero_variance;
    } else {
      s.ess = std::nan("");
    }
    table.push_back(std::move(s));
  }
  return table;
}

const Summary& find_summary(const std::vector<Summary>& table, const std::string& name) {
  for (const auto& s : table) {
    if (s.name == name) return s;
  }
  throw SchemaError("no summary row named '" + name + "'");
}

void write_summary_csv(std::ostream& out, const std::vector<Summary>& table) {
  out << "parameter,mean,median,sd,hpd_low,hpd_high,ess,ess_zero_variance\n";
  for (const auto& s : table) {
    out << fmt::format("{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{}\n", s.name, s.mean,
                       s.median, s.sd, s.hpd_low, s.hpd_high, s.ess, s.ess_zero_variance ? 1 : 0);
  }
}

std::string format_summary_table(const std::vector<Summary>& table) {
  std::size_t width = 9;
  for (const auto& s : table) width = std::max(width, s.name.size());
  std::string out = fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>24}  {:>8}\n", "Parameter",
                                width, "Mean", "Median", "S.D.", "HPD", "ESS");
  for (const auto& s : table) {
    const std::string hpd = fmt::format("({:.4f}, {:.4f})", s.hpd_low, s.hpd_high);
    out += fmt::format("{:<{}}  {:>10.4f}  {:>10.4f}  {:>10.4f}  {:>24}  {:>8.1f}\n", s.name, width,
                       s.mean, s.median, s.sd, hpd, s.ess);
  }
  return out;
}

}  // namespace pexsurv
