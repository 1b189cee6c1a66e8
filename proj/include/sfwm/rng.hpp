#pragma once
// Counter-based generator (Philox4x32-10). The state is (key, counter), so a
// substream is just a different key and streams never overlap.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sfwm {

class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed = 0, std::uint64_t stream = 0) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) refill();
    const std::uint64_t v = (std::uint64_t(out_[2 * pos_]) << 32) | out_[2 * pos_ + 1];
    ++pos_;
    return v;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // Independent generator for substream `id` of the same seed.
  Philox substream(std::uint64_t id) const {
    Philox r;
    r.key_ = key_;
    const std::uint64_t s = (std::uint64_t(ctr_[3]) << 32 | ctr_[2]) * 0x9E3779B97F4A7C15ULL + id + 1;
    r.ctr_ = {0, 0, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return r;
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> c = ctr_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
      const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    out_ = c;
    pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> out_{};
  int pos_ = 2;
};

}  // namespace sfwm
