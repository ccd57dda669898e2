#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace kdsp {

/// Name recorded in reports next to every seed.
inline constexpr const char *generator_name = "mt19937_64/u53/v1";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `stream` of a job seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

/// mt19937_64 with a portable 53-bit uniform double conversion.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF draw from a cumulative distribution (last entry = total mass).
inline std::size_t sample_cdf(const std::vector<double> &cdf, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end())
    --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

} // namespace kdsp
