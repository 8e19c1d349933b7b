#pragma once

#include <cstdint>

namespace gridfire {

/// Counter-based random stream: every draw is a pure hash of
/// (seed, stream, tag, a, b, c), so draw order does not matter and
/// sub-processes keyed on different tags are literally independent.
struct RngStream {
  uint64_t seed = 0;
  uint64_t stream = 0;  // scenario index

  enum Tag : uint64_t {
    kExoIgnite = 1,
    kExoSpread = 2,
    kFault = 3,
    kEndoSpread = 4,
    kGeneric = 5,
  };

  static uint64_t mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t bits(uint64_t tag, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) const {
    uint64_t h = mix(seed);
    h = mix(h ^ stream);
    h = mix(h ^ tag);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
  }

  /// Uniform double in [0, 1).
  double uniform(uint64_t tag, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) const {
    return static_cast<double>(bits(tag, a, b, c) >> 11) * 0x1.0p-53;
  }
};

}  // namespace gridfire
