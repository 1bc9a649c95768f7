#pragma once

#include <cmath>
#include <cstdint>

namespace infmax {

namespace detail {

// splitmix64 finalizer
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return detail::mix64(a ^ (detail::mix64(b + detail::kGolden)));
}

// Turns a 64-bit hash into a uniform double in [0, 1).
inline double u01_from_bits(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Counter-based generator: draw i of a stream is a pure function of
// (key, i), so substreams derived per worker or per sample index replay
// identically no matter how work is scheduled.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(detail::mix64(seed + detail::kGolden)) {}

  Rng substream(uint64_t id) const { return Rng(hash_combine(key_, id), 0); }

  uint64_t next() { return detail::mix64(key_ + (++counter_) * detail::kGolden); }

  // [0, 1)
  double uniform01() { return u01_from_bits(next()); }

  bool coin(double p) { return uniform01() < p; }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // uniform in [0, bound); bound > 0
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next()) * bound) >> 64);
  }

 private:
  Rng(uint64_t key, int) : key_(key) {}

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace infmax
