#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

// Deterministic, platform-portable randomness. Every draw that can affect a
// report goes through this header: std::mt19937_64 output is fully specified
// by the standard, and the uniform/bounded mappings below are hand-rolled
// because std::uniform_*_distribution and std::shuffle are
// implementation-defined and differ across standard libraries.
namespace verdict::rng {

// splitmix64 (Steele, Lea, Flood) step: advances `state` and returns the
// mixed output. Also used as a one-shot finalizer for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the bytes of `s`; stable across platforms.
inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Order-sensitive key derivation: folds each part into a splitmix chain.
inline std::uint64_t derive(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x6a09e667f3bcc908ULL;  // arbitrary fixed offset
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : parts) {
    state ^= p;
    out = splitmix64(state);
  }
  return out;
}

// Map a 64-bit word to a double in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// One uniform [0,1) draw from a derived key, without constructing an engine.
inline double unit_at(std::uint64_t key) {
  std::uint64_t s = key;
  return to_unit(splitmix64(s));
}

// A seeded stream for bulk draws. Wraps mt19937_64 (standard-specified
// sequence) with portable mappings on top.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : engine_(key) {}

  std::uint64_t next_u64() { return engine_(); }

  double next_unit() { return to_unit(next_u64()); }

  // Unbiased integer in [0, bound) via rejection sampling; bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
      std::uint64_t x = next_u64();
      if (x < limit) return x % bound;
    }
  }

  // Fisher-Yates with our own index draws (std::shuffle is not portable).
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace verdict::rng
