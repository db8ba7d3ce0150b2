#include "rdabc/rng.hpp"

#include <cmath>

#include "rdabc/errors.hpp"
#include "rdabc/stats.hpp"

namespace rdabc {

double Rng::normal() { return norm_quantile(uniform_pos()); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_int: n must be positive");
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw ContractError("gamma: shape and rate must be positive");
  if (shape < 1.0) {
    // Boost: G(a) = G(a+1) * U^{1/a}.
    const double u = uniform_pos();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw ContractError("poisson: mean must be >= 0");
  std::uint64_t count = 0;
  // Knuth's product method on chunks keeps exp() in range for large means.
  while (mean > 0.0) {
    const double chunk = std::min(mean, 50.0);
    const double limit = std::exp(-chunk);
    double prod = uniform_pos();
    while (prod > limit) {
      ++count;
      prod *= uniform_pos();
    }
    mean -= chunk;
  }
  return count;
}

}  // namespace rdabc
