#pragma once

// Counter-based randomness. Every draw is a pure function of
// (seed, stream, index), so samples, trials and tapes can be generated in
// any order or in parallel and still reproduce bit for bit.

#include <array>
#include <cstdint>
#include <limits>

namespace ergolab {

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Maps 64 uniform bits onto {0..k-1} by multiply-shift (bias < k / 2^64).
inline std::uint32_t scale_to(std::uint64_t bits, std::uint32_t k) {
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(bits) * k) >> 64);
}

/// Sequential view of the counter stream (seed, stream); models
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  std::uint32_t below(std::uint32_t k) { return scale_to((*this)(), k); }
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
};

/// Derives an independent 64-bit seed from (seed, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Virtual per-point tapes of uniform colors: symbol(p, t) is the t-th
/// entry of point p's tape. Nothing is stored.
class TapeSpace {
 public:
  TapeSpace(std::uint64_t seed, std::uint32_t k);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t k() const { return k_; }
  std::uint32_t symbol(std::uint32_t point, std::uint64_t t) const;

 private:
  std::uint64_t seed_;
  std::uint32_t k_;
  std::array<std::uint32_t, 2> key_;
};

}  // namespace ergolab
