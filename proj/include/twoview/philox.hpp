#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and a small
// stream wrapper used by the dataset generator.
//
// A stream is identified by a 64-bit seed (the Philox key) and three 32-bit
// stream words. Block i of a stream is Philox(key = seed, counter = {i, s0, s1, s2}).
// Each block yields four 32-bit words consumed in order. Derived variates:
//
//   uniform()  : 64 bits (w[k+1] << 32 | w[k]) >> 11, times 2^-53, in [0, 1)
//   normal()   : Box-Muller on (1 - uniform(), uniform()); both outputs are
//                used, cosine branch first

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace twoview {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kRounds = 10;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int i = 1; i < kRounds; ++i) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  PhiloxStream(std::uint64_t seed, std::uint32_t s0, std::uint32_t s1 = 0, std::uint32_t s2 = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_{s0, s1, s2} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = (*this)();
    const std::uint64_t hi = (*this)();
    return (hi << 32) | lo;
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  void refill() {
    buffer_ = Philox4x32::generate({block_, stream_[0], stream_[1], stream_[2]}, key_);
    ++block_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::array<std::uint32_t, 3> stream_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace twoview
