#include "tightness/rng.hpp"

#include <cmath>

namespace tightness {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// Exponential ziggurat tables (Marsaglia-Tsang, 256 layers).
// x[0] > x[1] = r > ... > x[256] = 0; f[i] = exp(-x[i]).
struct ZigTables {
  static constexpr double r = 7.69711747013104972;
  static constexpr double v = 3.9496598225815571993e-3;
  double x[257];
  double f[257];
  ZigTables() {
    x[0] = v * std::exp(r);
    x[1] = r;
    f[0] = std::exp(-x[0]);
    f[1] = std::exp(-r);
    for (int i = 2; i <= 256; ++i) {
      double y = f[i - 1] + v / x[i - 1];
      x[i] = (y >= 1.0) ? 0.0 : -std::log(y);
      if (x[i] < 0.0) x[i] = 0.0;
      f[i] = std::exp(-x[i]);
    }
    x[256] = 0.0;
    f[256] = 1.0;
  }
};

const ZigTables& zig() {
  static const ZigTables t;
  return t;
}

}  // namespace

RngStream::RngStream(std::uint64_t master, std::uint64_t index)
    : master_(master), index_(index) {
  // splitmix over the hashed pair fills the xoshiro state; the all-zero
  // state is unreachable because splitmix64 is a bijection of a counter.
  std::uint64_t seed = hash_combine(master, index);
  s_[0] = splitmix64_next(seed);
  s_[1] = splitmix64_next(seed);
  s_[2] = splitmix64_next(seed);
  s_[3] = splitmix64_next(seed);
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::exp1() {
  const ZigTables& t = zig();
  for (;;) {
    std::uint64_t j = next_u64();
    unsigned i = static_cast<unsigned>(j & 255u);
    double u = static_cast<double>(j >> 11) * 0x1.0p-53;
    double x = u * t.x[i];
    if (x < t.x[i + 1]) return x;  // strictly inside the layer
    if (i == 0) {
      // base layer overflow = tail beyond r; memoryless restart
      return ZigTables::r - std::log1p(-unit());
    }
    if (t.f[i] + unit() * (t.f[i + 1] - t.f[i]) < std::exp(-x)) return x;
  }
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = unit();
  double u2 = unit();
  // 1 - u1 in (0,1], so the log is finite
  double rad = std::sqrt(-2.0 * std::log1p(-u1));
  double ang = 6.283185307179586476925286766559 * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

}  // namespace tightness
