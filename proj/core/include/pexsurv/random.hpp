#pragma once

#include <cstdint>
#include <random>

namespace pexsurv {

/// Seeded generator with portable variate transforms.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std:: distribution adaptors are implementation-defined, so
/// every transform used by the samplers is written out here; a given seed
/// yields the same draws on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform();

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential with rate 1.
  double exponential();

  /// log of a Gamma(shape, 1) variate. Stays finite for tiny shapes where the
  /// variate itself underflows.
  double log_gamma_variate(double shape);

  /// Gamma(shape, rate) with mean shape / rate. Underflowing draws are clamped
  /// to the smallest normal double so the result is always > 0.
  double gamma(double shape, double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pexsurv
