#include "ergolab/rng.hpp"

#include "ergolab/error.hpp"

namespace ergolab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Domain tag for tape counters, keeps tapes apart from sample streams.
constexpr std::uint32_t kTapeDomain = 0x7A9E5EEDu;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 2> split(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ (tag * 0xD1B54A32D192ED03ull));
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : key_(split(splitmix64(seed ^ 0x5851F42D4C957F2Dull))), stream_(stream) {}

StreamRng::result_type StreamRng::operator()() {
  if (used_ >= 4) {
    const auto s = split(stream_);
    const auto b = split(block_index_++);
    buf_ = philox4x32({b[0], b[1], s[0], s[1]}, key_);
    used_ = 0;
  }
  const std::uint64_t lo = buf_[used_];
  const std::uint64_t hi = buf_[used_ + 1];
  used_ += 2;
  return lo | (hi << 32);
}

TapeSpace::TapeSpace(std::uint64_t seed, std::uint32_t k) : seed_(seed), k_(k), key_(split(seed)) {
  if (k < 1) throw UsageError("alphabet size must be >= 1");
}

std::uint32_t TapeSpace::symbol(std::uint32_t point, std::uint64_t t) const {
  const auto tt = split(t);
  const auto out = philox4x32({point, tt[0], tt[1], kTapeDomain}, key_);
  const std::uint64_t bits = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
  return scale_to(bits, k_);
}

}  // namespace ergolab
