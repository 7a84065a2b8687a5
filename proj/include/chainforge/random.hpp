#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace chainforge {

using u128 = unsigned __int128;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Reproducible random stream. mt19937_64 seeded through std::seed_seq from the
/// 32-bit halves of (seed, stream_id); both algorithms are fixed by the C++ standard,
/// and every derived draw below uses explicit integer arithmetic, so a given
/// (seed, stream_id) produces the same sequence on every conforming platform.
class SeededStream {
 public:
  static constexpr const char* kGenerator = "mt19937_64/seed_seq v1";

  SeededStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// An independent stream keyed by (this stream, id); does not consume draws.
  SeededStream child(std::uint64_t id) const { return SeededStream(seed_, splitmix64(stream_id_ ^ splitmix64(id + 1))); }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform_below needs a positive bound");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  u128 uniform_below_wide(u128 bound) {
    if (bound == 0) throw ParameterError("uniform_below needs a positive bound");
    if (bound <= ~std::uint64_t{0}) return uniform_below(static_cast<std::uint64_t>(bound));
    const u128 all = ~u128{0};
    const u128 limit = all - (all % bound);
    u128 x;
    do {
      const u128 high = next();
      x = (high << 64) | next();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    return uniform01() < p;
  }

  /// Fisher-Yates shuffle driven by uniform_below.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(static_cast<std::uint64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace chainforge
