#include "pexsurv/pex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(std::span<const double> cuts, std::vector<Violation>& out) {
  using Rule = Violation::Rule;
  if (cuts.empty()) {
    out.push_back({Rule::empty_grid, 0, "grid has no cut points"});
    return;
  }
  if (cuts[0] != 0.0) {
    out.push_back({Rule::first_cut_not_zero, 0, "first cut point must be 0"});
  }
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    if (!std::isfinite(cuts[j])) {
      out.push_back({Rule::non_finite_cut, j, "cut point " + std::to_string(j) + " is not finite"});
      break;
    }
  }
  for (std::size_t j = 1; j < cuts.size(); ++j) {
    if (!(cuts[j - 1] < cuts[j])) {
      out.push_back({Rule::not_increasing, j,
                     "cut points not strictly increasing at index " + std::to_string(j)});
      break;
    }
  }
}

void require_positive_time(double t) {
  if (!(t > 0.0)) throw DomainError("time must be > 0 (support is (0, inf))");
}

}  // namespace

bool ValidationReport::has(Violation::Rule rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [rule](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.message << '\n';
  return os.str();
}

ValidationReport validate_params(std::span<const double> cut_points, std::span<const double> rates) {
  using Rule = Violation::Rule;
  ValidationReport report;
  check_grid(cut_points, report.violations);
  if (rates.size() != cut_points.size()) {
    report.violations.push_back(
        {Rule::length_mismatch, std::min(rates.size(), cut_points.size()),
         "rates has length " + std::to_string(rates.size()) + " but grid has " +
             std::to_string(cut_points.size())});
  }
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (!(rates[j] >= 0.0) || !std::isfinite(rates[j])) {
      report.violations.push_back(
          {Rule::negative_rate, j, "rate " + std::to_string(j) + " must be finite and >= 0"});
      break;
    }
  }
  return report;
}

TimeGrid::TimeGrid(std::vector<double> cut_points) : cuts_(std::move(cut_points)) {
  std::vector<Violation> found;
  check_grid(cuts_, found);
  if (!found.empty()) {
    throw InvalidParamsError(ValidationReport{std::move(found)}.to_string());
  }
}

double TimeGrid::upper(std::size_t j) const { return j + 1 < cuts_.size() ? cuts_[j + 1] : kInf; }

double TimeGrid::overlap(double t, std::size_t j) const {
  const double lo = cuts_[j];
  if (!(t > lo)) return 0.0;
  return std::min(t, upper(j)) - lo;
}

std::size_t interval_index(double t, const TimeGrid& grid) {
  require_positive_time(t);
  const auto cuts = grid.cut_points();
  // First cut >= t sits at j + 1 for t in (a_j, a_{j+1}].
  const auto it = std::lower_bound(cuts.begin(), cuts.end(), t);
  return static_cast<std::size_t>(it - cuts.begin()) - 1;
}

PEParams::PEParams(TimeGrid grid, std::vector<double> rates)
    : grid_(std::move(grid)), rates_(std::move(rates)) {
  const auto report = validate_params(grid_.cut_points(), rates_);
  if (!report.ok()) throw InvalidParamsError(report.to_string());
  build_prefix();
}

PEParams::PEParams(Trusted, TimeGrid grid, std::vector<double> rates)
    : grid_(std::move(grid)), rates_(std::move(rates)) {
  build_prefix();
}

void PEParams::build_prefix() {
  cum_at_cut_.assign(rates_.size(), 0.0);
  for (std::size_t j = 1; j < rates_.size(); ++j) {
    cum_at_cut_[j] = cum_at_cut_[j - 1] + rates_[j - 1] * (grid_[j] - grid_[j - 1]);
  }
}

double PEParams::total_cum_hazard() const {
  return rates_.back() > 0.0 ? kInf : cum_at_cut_.back();
}

double PEParams::hazard(double t) const { return rates_[interval_index(t, grid_)]; }

double PEParams::cum_hazard(double t) const {
  const std::size_t j = interval_index(t, grid_);
  return cum_at_cut_[j] + rates_[j] * (t - grid_[j]);
}

double PEParams::survival(double t) const { return std::exp(-cum_hazard(t)); }

double PEParams::cdf(double t) const { return -std::expm1(-cum_hazard(t)); }

double PEParams::log_density(double t) const {
  const std::size_t j = interval_index(t, grid_);
  if (rates_[j] == 0.0) return -kInf;
  return std::log(rates_[j]) - (cum_at_cut_[j] + rates_[j] * (t - grid_[j]));
}

double PEParams::density(double t) const { return std::exp(log_density(t)); }

double PEParams::inverse_cum_hazard(double w) const {
  if (!(w > 0.0)) throw DomainError("cumulative hazard level must be > 0");
  const std::size_t m = rates_.size();
  // Smallest j with H(a_{j+1}) >= w; rates_[j] > 0 is guaranteed unless j is last.
  const auto first = cum_at_cut_.begin() + 1;
  const auto it = std::lower_bound(first, cum_at_cut_.end(), w);
  const std::size_t j = static_cast<std::size_t>(it - first);
  if (j == m - 1 && rates_[j] == 0.0) {
    throw UnreachableMassError("requested mass lies beyond a zero-rate tail");
  }
  const double t = grid_[j] + (w - cum_at_cut_[j]) / rates_[j];
  return std::min(t, grid_.upper(j));
}

double PEParams::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability must lie in (0, 1)");
  return inverse_cum_hazard(-std::log1p(-p));
}

double PEParams::sample(Rng& rng, const TruncationBounds& bounds) const {
  const double lower = bounds.lower.value_or(0.0);
  if (!(lower >= 0.0)) throw DomainError("lower bound must be >= 0");
  if (bounds.upper && !(*bounds.upper > lower)) {
    throw DomainError("upper bound must exceed lower bound");
  }
  const double h_lo = lower > 0.0 ? cum_hazard(lower) : 0.0;
  const double h_hi = bounds.upper ? cum_hazard(*bounds.upper) : total_cum_hazard();
  if (!(h_hi > h_lo)) throw UnreachableMassError("no probability mass inside the bounds");

  // u ~ U(cdf(lower), cdf(upper)) pushed through the quantile, written in
  // cumulative-hazard space so that deep tails keep full precision.
  const double u = rng.uniform();
  double w;
  if (std::isinf(h_hi)) {
    w = h_lo - std::log(u);
  } else {
    w = h_lo - std::log1p(-u * -std::expm1(-(h_hi - h_lo)));
  }
  double t = inverse_cum_hazard(w);
  if (!(t > lower)) t = std::nextafter(lower, kInf);
  if (bounds.upper && t > *bounds.upper) t = *bounds.upper;
  return t;
}

PEParams PEParams::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("rate scale factor must be positive and finite");
  }
  std::vector<double> r(rates_);
  for (double& x : r) x *= factor;
  return PEParams(Trusted{}, grid_, std::move(r));
}

}  // namespace pexsurv
