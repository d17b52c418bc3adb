#pragma once

// Piecewise exponential distribution PE(rates, grid).
//
// A grid {a_1 = 0 < a_2 < ... < a_m} splits (0, inf) into m intervals
// I_j = (a_j, a_{j+1}], the last one unbounded. The hazard is the constant
// rate of the interval containing t. Interval indices are 0-based here.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pexsurv/random.hpp"

namespace pexsurv {

struct Violation {
  enum class Rule {
    empty_grid,
    length_mismatch,
    first_cut_not_zero,
    non_finite_cut,
    not_increasing,
    negative_rate,
  };

  Rule rule;
  std::size_t index;  // first offending element
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Violation::Rule rule) const;
  std::string to_string() const;
};

/// Checks a (grid, rates) pair: equal non-zero lengths, a_1 == 0, finite and
/// strictly increasing cut points, rates >= 0. Violations are returned, not thrown.
ValidationReport validate_params(std::span<const double> cut_points, std::span<const double> rates);

class TimeGrid {
 public:
  /// Throws InvalidParamsError unless cut_points[0] == 0 and the points are
  /// finite and strictly increasing.
  explicit TimeGrid(std::vector<double> cut_points);

  std::size_t size() const { return cuts_.size(); }
  double operator[](std::size_t j) const { return cuts_[j]; }
  std::span<const double> cut_points() const { return cuts_; }

  double lower(std::size_t j) const { return cuts_[j]; }
  /// a_{j+1}; +inf for the last interval.
  double upper(std::size_t j) const;

  /// Length of (0, t] ∩ I_j.
  double overlap(double t, std::size_t j) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> cuts_;
};

/// Index j with t in (a_j, a_{j+1}]. Throws DomainError for t <= 0 or NaN.
std::size_t interval_index(double t, const TimeGrid& grid);

struct TruncationBounds {
  std::optional<double> lower;  // absent means 0
  std::optional<double> upper;  // absent means +inf
};

class PEParams {
 public:
  /// Throws InvalidParamsError carrying the full violation list.
  PEParams(TimeGrid grid, std::vector<double> rates);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> rates() const { return rates_; }
  std::size_t size() const { return rates_.size(); }

  /// H(a_j) for each cut point.
  std::span<const double> cum_hazard_at_cuts() const { return cum_at_cut_; }
  /// lim H(t) as t -> inf: +inf unless the last rate is zero.
  double total_cum_hazard() const;

  double hazard(double t) const;
  double cum_hazard(double t) const;
  double survival(double t) const;
  double cdf(double t) const;
  double log_density(double t) const;
  double density(double t) const;

  /// Generalized inverse inf{t : cdf(t) >= p} for p in (0, 1).
  double quantile(double p) const;
  double median() const { return quantile(0.5); }

  /// inf{t : H(t) >= w} for w > 0; UnreachableMassError when w exceeds the
  /// total cumulative hazard.
  double inverse_cum_hazard(double w) const;

  /// Inverse-cdf draw restricted to (lower, upper].
  double sample(Rng& rng, const TruncationBounds& bounds = {}) const;

  /// Same grid with every rate multiplied by factor > 0.
  PEParams scaled(double factor) const;

 private:
  struct Trusted {};
  PEParams(Trusted, TimeGrid grid, std::vector<double> rates);
  void build_prefix();

  TimeGrid grid_;
  std::vector<double> rates_;
  std::vector<double> cum_at_cut_;
};

}  // namespace pexsurv
