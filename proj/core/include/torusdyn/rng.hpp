#pragma once

// Deterministic random number utilities. All sampling in the toolkit goes
// through this header so that a fixed seed reproduces every estimate
// bit-for-bit across platforms. std::uniform_real_distribution is avoided on
// purpose: its output is implementation-defined, the raw 53-bit mapping below
// is not.

#include <cmath>
#include <cstdint>
#include <random>

#include "torusdyn/common.hpp"

namespace torusdyn {

// splitmix64: mixes a seed and an index into an independent stream seed.
// Used to fan one campaign seed out to per-check, per-point, per-disk streams
// without correlation between them.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform double in [0, 1) built from the top 53 bits of one engine draw.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call, cache for the pair).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform point in [0,1)^d.
  Vec point(int d) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = uniform();
    return x;
  }

  // d x k matrix of independent standard normals (random frame seed).
  Mat gaussian_matrix(int d, int k) {
    Mat m(d, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < d; ++i) m(i, j) = gaussian();
    return m;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace torusdyn
