#include "plrsq/rng.hpp"

#include <cmath>

namespace plrsq {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive_seed(std::uint64_t seed,
                               std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = mix64(seed);
  for (std::uint64_t tag : tags) {
    state = mix64(state ^ mix64(tag + 0x632BE59BD9B4E019ULL));
  }
  return state;
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(seed, tags));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace plrsq
