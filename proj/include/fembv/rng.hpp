#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fembv {

// Deterministic random source. All draws are explicit transforms of
// std::mt19937_64 output (whose sequence is pinned by the standard), so a
// given (seed, stream) pair reproduces bit-identically on every platform
// and regardless of how many worker threads run elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); never returns 0, safe under log().
  double uniform01_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased uniform integer on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit span
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return lo + static_cast<std::int64_t>(x % range);
    }
  }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // k distinct values from {0, ..., n-1}, sorted ascending (Floyd's method).
  std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k);

 private:
  // splitmix64 over seed and stream, decorrelating nearby pairs.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

inline std::vector<std::int64_t> Rng::sample_without_replacement(std::int64_t n,
                                                                 std::int64_t k) {
  std::vector<std::int64_t> picked;
  picked.reserve(static_cast<size_t>(k));
  for (std::int64_t j = n - k; j < n; ++j) {
    const std::int64_t t = uniform_int(0, j);
    bool taken = false;
    for (const std::int64_t v : picked) {
      if (v == t) {
        taken = true;
        break;
      }
    }
    picked.push_back(taken ? j : t);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace fembv
