#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace sdi {

/// SplitMix64 finalizer. Used only to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Well-known stream ids. Per-subject streams use the subject index directly,
/// so these live in the high range.
namespace stream {
inline constexpr std::uint64_t prototypes = 0xF000'0000'0000'0001ULL;
inline constexpr std::uint64_t feature_map = 0xF000'0000'0000'0002ULL;
inline constexpr std::uint64_t folds = 0xF000'0000'0000'0003ULL;
inline constexpr std::uint64_t balance = 0xF000'0000'0000'0004ULL;
inline constexpr std::uint64_t kmeans = 0xF000'0000'0000'0005ULL;
inline constexpr std::uint64_t forest = 0xF000'0000'0000'0006ULL;
inline constexpr std::uint64_t iforest = 0xF000'0000'0000'0007ULL;
inline constexpr std::uint64_t subjects = 0xF000'0000'0000'0008ULL;
}  // namespace stream

/// Portable seeded generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions below are written out
/// by hand because the std:: distributions are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent substream `id` of a master seed. Streams with different ids
  /// do not depend on each other's consumption, so generation order is free.
  static Rng substream(std::uint64_t seed, std::uint64_t id) {
    return Rng(splitmix64(seed) ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n) without modulo bias.
  std::uint64_t index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; one draw per call, no cached pair.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  template <class T>
  void shuffle(std::vector<T>& values) {
    shuffle(std::span<T>(values));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sdi
