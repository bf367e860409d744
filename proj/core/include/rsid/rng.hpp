#pragma once

#include <cstdint>

namespace rsid {

/// Deterministic stream RNG: every (seed, stream) pair yields an independent,
/// platform-stable sequence, so parallel workers that own disjoint streams
/// produce bitwise-identical results regardless of scheduling. Distributions
/// are implemented here instead of <random> because the standard library's
/// distribution outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform();

  /// Standard normal via Box-Muller; consumes two uniforms per draw.
  double normal();

  /// Exponential with the given mean.
  double exponential(double mean);

  /// Gamma(shape, scale) by Marsaglia-Tsang squeeze; requires shape >= 1.
  double gamma(double shape, double scale);

 private:
  std::uint64_t state_;
};

}  // namespace rsid
