#pragma once

#include <cstdint>

namespace tightness {

// splitmix64 step; the standard seed expander.
inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Order-sensitive 64-bit combiner used to derive stream indices from
// (check tag, grid position, replica, ...) tuples.
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 12) + (a >> 7));
  return splitmix64_next(s);
}

/**
 * Deterministic random stream addressed by (master seed, index).
 *
 * State is derived by hashing, never by jumping, so any (master, index)
 * pair can be built independently on any thread: identical pair, identical
 * draw sequence, regardless of scheduling. Core generator: xoshiro256++.
 * No OS entropy is ever read.
 */
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t index);

  std::uint64_t master() const { return master_; }
  std::uint64_t index() const { return index_; }

  std::uint64_t next_u64();

  // uniform on [0,1), 53-bit resolution
  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard exponential, ziggurat fast path
  double exp1();

  double exponential(double rate) { return exp1() / rate; }

  // standard normal, Box-Muller with cached spare
  double normal();

 private:
  std::uint64_t s_[4];
  std::uint64_t master_ = 0;
  std::uint64_t index_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace tightness
