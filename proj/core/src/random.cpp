#include "pexsurv/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pexsurv/errors.hpp"

namespace pexsurv {

double Rng::uniform() {
  // 53 random mantissa bits, shifted by half an ulp off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma shape must be positive and finite");
  }
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("gamma rate must be positive and finite");
  }
  const double value = std::exp(log_gamma_variate(shape) - std::log(rate));
  if (value < std::numeric_limits<double>::min()) return std::numeric_limits<double>::min();
  if (!std::isfinite(value)) return std::numeric_limits<double>::max();
  return value;
}

}  // namespace pexsurv
