#pragma once

#include <functional>

#include "pexsurv/random.hpp"

namespace pexsurv {

struct SliceConfig {
  double width = 1.0;  // initial bracket width on the working scale
  int max_steps = 50;  // stepping-out cap; past it the bracket is used as is
};

using LogDensity = std::function<double(double)>;

/// One stepping-out + shrinkage slice transition (Neal 2003) for a scalar
/// target. Throws InvariantViolation when the log target is not finite at x0.
double slice_sample(const LogDensity& log_target, double x0, const SliceConfig& config, Rng& rng);

/// Slice transition for a positive parameter run on y = log x with the
/// Jacobian term added. `log_target` is the density of x.
double slice_sample_positive(const LogDensity& log_target, double x0, const SliceConfig& config,
                             Rng& rng);

}  // namespace pexsurv
