#pragma once

#include <cmath>
#include <cstdint>

namespace mslab {

// Deterministic, self-contained random stream.  Every randomized routine in
// the library derives its stream from (root_seed, counter) so that results
// are bit-reproducible for a fixed config and independent of how an ensemble
// is partitioned across threads:
//
//   sample k of a suite with root seed s uses  Splitmix64(mix(s, k))
//
// where mix() whitens the pair below.  Nothing here depends on the standard
// library's distribution implementations.

/// splitmix64 step (Vigna); passes BigCrush, period 2^64.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive the stream seed for one sample of an ensemble.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  std::uint64_t s = root;
  std::uint64_t a = splitmix64_next(s);
  s = root ^ (0x9e3779b97f4a7c15ULL * (counter + 1));
  return a ^ splitmix64_next(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  /// uniform in [0, 1)
  double uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  /// uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// standard normal via Box-Muller (self-contained for reproducibility)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(6.283185307179586476925286766559 * u2);
    double sN = std::sin(6.283185307179586476925286766559 * u2);
    spare_ = r * sN;
    have_spare_ = true;
    return r * c;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mslab
