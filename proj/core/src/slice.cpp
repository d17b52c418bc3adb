#include "pexsurv/slice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pexsurv/errors.hpp"

namespace pexsurv {

double slice_sample(const LogDensity& log_target, double x0, const SliceConfig& config, Rng& rng) {
  const double f0 = log_target(x0);
  if (!std::isfinite(f0)) {
    throw InvariantViolation("slice sampler: log target is not finite at the current point (" +
                             std::to_string(x0) + ")");
  }
  const double level = f0 - rng.exponential();
  const double w = config.width;

  double left = x0 - w * rng.uniform();
  double right = left + w;
  int j = static_cast<int>(std::floor(config.max_steps * rng.uniform()));
  int k = config.max_steps - 1 - j;
  while (j-- > 0 && log_target(left) > level) left -= w;
  while (k-- > 0 && log_target(right) > level) right += w;

  for (;;) {
    const double x1 = left + rng.uniform() * (right - left);
    if (log_target(x1) > level) return x1;
    if (x1 < x0) {
      left = x1;
    } else {
      right = x1;
    }
    // Bracket collapsed onto x0 within rounding.
    if (!(right - left > 1e-14 * (1.0 + std::abs(x0)))) return x0;
  }
}

double slice_sample_positive(const LogDensity& log_target, double x0, const SliceConfig& config,
                             Rng& rng) {
  if (!(x0 > 0.0)) throw InvariantViolation("slice sampler: positive parameter is not > 0");
  const auto on_log = [&log_target](double y) {
    const double x = std::exp(y);
    if (!(x > 0.0) || !std::isfinite(x)) return -std::numeric_limits<double>::infinity();
    return log_target(x) + y;
  };
  return std::exp(slice_sample(on_log, std::log(x0), config, rng));
}

}  // namespace pexsurv
