#include "rsid/rng.hpp"

#include <cmath>
#include <numbers>

#include "rsid/errors.hpp"

namespace rsid {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix(mix(seed + kGolden) ^ (stream * 0xDA942042E4DD58B5ULL + 1))) {}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix(state_);
}

double Rng::uniform() {
  // (x >> 11) spans [0, 2^53); the half-step keeps the result strictly inside
  // (0, 1) so log() in the transforms below is always finite.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double mean) {
  if (mean <= 0.0) throw ParameterError("exponential mean must be positive");
  return -mean * std::log(uniform());
}

double Rng::gamma(double shape, double scale) {
  if (shape < 1.0) throw ParameterError("gamma sampler requires shape >= 1");
  if (scale <= 0.0) throw ParameterError("gamma scale must be positive");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

}  // namespace rsid
