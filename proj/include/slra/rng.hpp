#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace slra {

// SplitMix64 finalizer. Every seeded choice in the library goes through this
// mixer so that states are reproducible across platforms and runs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(a ^ mix64(b ^ mix64(c)));
}

// Uniform in [0,1) from a 64-bit hash.
inline double to_unit(std::uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

// Lower-tail standard normal quantile (Acklam's rational approximation,
// ~1e-9 relative). The central branch avoids log/sqrt, which keeps
// counter-addressed Gaussian regeneration cheap on sketch hot paths.
inline double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  if (p >= plow && p <= 1 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(std::max(p, 1e-300)));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double q = std::sqrt(-2 * std::log(std::max(1 - p, 1e-300)));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

inline double normal_from_bits(std::uint64_t h) {
  // Map to (0,1) strictly, then through the quantile.
  return normal_quantile((double(h >> 11) + 0.5) * 0x1.0p-53);
}

// Counter-addressed standard normals, two per counter. Sketches regenerate
// Gaussian rows on demand from these instead of storing them.
inline void normal_pair(std::uint64_t seed, std::uint64_t ctr, double& z0, double& z1) {
  z0 = normal_from_bits(mix64(seed, 2 * ctr));
  z1 = normal_from_bits(mix64(seed, 2 * ctr + 1));
}

inline double normal_at(std::uint64_t seed, std::uint64_t ctr) {
  return normal_from_bits(mix64(seed, ctr));
}

// Sequential generator for places that want a stream rather than a counter.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double uniform() { return to_unit(next_u64()); }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return next_u64() % n; }

  double normal() { return normal_from_bits(next_u64()); }

  // First s entries of a random permutation of [0, n).
  std::vector<int> sample_without_replacement(int n, int s) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < s; ++i) {
      int j = i + int(index(std::uint64_t(n - i)));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(s);
    return idx;
  }

 private:
  std::uint64_t state_;
};

}  // namespace slra
