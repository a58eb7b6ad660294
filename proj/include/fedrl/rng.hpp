#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace fedrl {

namespace detail {

// SplitMix64 finalizer. Bit-stable on every platform we build for.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based random stream: output i is a pure function of (key, i), so a
// stream can be checkpointed as two integers and resumed exactly. Streams for
// different purposes are derived by hashing the master seed with a label
// chain, which keeps per-agent randomness independent of how many agents run.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() { return detail::mix64(key_ ^ (0xd1b54a32d192ed03ULL * ++counter_)); }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive; modulo bias is irrelevant
  // at the n values used here (grid cells, buffer indices).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller. Consumes two draws per call and returns
  // one value, so the stream position stays a pure function of the call count.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Hash-chains the parts into a stream key.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8a5cd789635d2dffULL;
  for (std::uint64_t p : parts) h = detail::mix64(h ^ detail::mix64(p));
  return h;
}

inline RngStream derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = detail::mix64(master);
  for (std::uint64_t p : parts) h = detail::mix64(h ^ detail::mix64(p));
  return RngStream(h);
}

// Stable label -> integer mapping for stream derivation.
inline std::uint64_t stream_label(const char* name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* c = name; *c; ++c) h = (h ^ static_cast<std::uint64_t>(*c)) * 0x100000001b3ULL;
  return h;
}

}  // namespace fedrl
