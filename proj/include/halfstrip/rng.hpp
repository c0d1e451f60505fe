#pragma once

// Counter-based random streams (Philox4x32-10). A stream is fully determined
// by (master seed, stream index); draws are numbered by a 64-bit counter, so
// per-trial streams can be created in any order on any thread.

#include <array>
#include <cstdint>

namespace halfstrip {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    if (used_ == 2) refill();
    return buffer_[used_++];
  }

  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<double, 2> buffer_{};
  int used_ = 2;
};

}  // namespace halfstrip
