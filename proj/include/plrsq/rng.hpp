#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace plrsq {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard library distributions are implementation-defined, so the
/// uniform and normal variates are produced here instead (53-bit uniform
/// mantissa, Marsaglia polar method for normals).
///
/// Independent streams are obtained with derive(): the parent seed and a
/// list of integer tags (e.g. split, class, instance) are folded through
/// mix64 to produce the child seed. Two different tag paths give
/// statistically independent streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);
  static std::uint64_t derive_seed(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle with this generator.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace plrsq
