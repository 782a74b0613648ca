#pragma once

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw, SC'11).
// Bitwise compatible with the Random123 reference implementation.

#include <array>
#include <cstdint>

namespace manhattan {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kRounds = 10;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
    return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
            std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
  }
};

// Identifier recorded in every serialized output; changing the site keying
// below is a format-breaking change.
inline constexpr const char* kGeneratorId = "philox4x32-10/site-v1";

// Uniform in [0,1) for lattice site (a,b) of stream `stream` under `seed`.
constexpr double site_uniform(std::uint64_t seed, std::uint64_t stream, int a, int b) {
  const Philox4x32::Counter ctr{std::uint32_t(a), std::uint32_t(b), std::uint32_t(stream),
                                std::uint32_t(stream >> 32)};
  const Philox4x32::Key key{std::uint32_t(seed), std::uint32_t(seed >> 32)};
  const auto out = Philox4x32::apply(ctr, key);
  const std::uint64_t bits = (std::uint64_t(out[0]) << 32) | out[1];
  return double(bits >> 11) * 0x1.0p-53;
}

// Small sequential generator on top of Philox, for searches that need a
// deterministic stream of draws rather than per-site values.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream) : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

  std::uint64_t next_u64() {
    if (used_ >= 2) refill();
    const std::uint64_t v = (std::uint64_t(block_[2 * used_]) << 32) | block_[2 * used_ + 1];
    ++used_;
    return v;
  }
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

 private:
  void refill() {
    block_ = Philox4x32::apply({std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
                                std::uint32_t(stream_), std::uint32_t(stream_ >> 32)},
                               key_);
    ++counter_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter block_{};
  int used_ = 2;
};

}  // namespace manhattan
