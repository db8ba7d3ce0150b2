#ifndef RDABC_RNG_HPP_
#define RDABC_RNG_HPP_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rdabc {

// Seeded random stream.  All variates are derived from the raw 64-bit engine
// output through fixed arithmetic (no implementation-defined distributions),
// so a given seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)), seed_(seed) {}

  // Independent child stream for a work unit (training row, restart, chain).
  // Derivation is a pure function of (seed, salt).
  Rng derive(std::uint64_t salt) const { return Rng(seed_ ^ salt); }

  std::uint64_t seed() const { return seed_; }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0,1): never exactly zero, safe under log().
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Standard normal via inverse-CDF of a (0,1) uniform.
  double normal();

  // Integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  // Gamma(shape, rate) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double rate);

  // Poisson(mean) by uniform products (mean split into chunks of <= 50).
  std::uint64_t poisson(double mean);

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer; decorrelates nearby seeds.
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace rdabc

#endif  // RDABC_RNG_HPP_
