#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace inflection {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a seed and a sequence of labels.
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t h = mix64(seed);
  for (auto v : labels) h = mix64(h ^ mix64(v + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Counter-based generator: the i-th draw is a pure function of (key, i),
/// so every simulation cell owns a reproducible stream regardless of the
/// order cells are visited in.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return mix64(key_ ^ mix64(++counter_));
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Poisson(lambda) draw by CDF inversion of a single uniform. Monotone in
/// lambda for a fixed u, which gives common-random-number coupling between
/// factual and counterfactual simulations.
std::int64_t poisson_from_uniform(double lambda, double u);

}  // namespace inflection
