// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIRHC_RANDOM_HPP
#define PIRHC_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace pirhc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A block is a pure function of (key, counter), which is what lets every
/// rollout own an independent stream without any shared state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      const std::uint64_t p0 = std::uint64_t{kMulA} * counter[0];
      const std::uint64_t p1 = std::uint64_t{kMulB} * counter[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85;
};

/// SplitMix64 finalizer; used to derive child seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Hashes a master seed together with a path of labels into a child seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t label : path) h = splitmix64(h ^ splitmix64(label + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Address of one independent stream of standard normal draws.
struct NoiseStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const NoiseStream&, const NoiseStream&) = default;
};

/// Sequential reader over a NoiseStream.
///
/// Draw j of stream (seed, index) depends only on (seed, index, j): the
/// 64-bit seed is the Philox key, the stream index occupies the upper half
/// of the counter and the block number the lower half.
class NormalSource {
 public:
  explicit NormalSource(const NoiseStream& stream) noexcept
      : key_{static_cast<std::uint32_t>(stream.master_seed), static_cast<std::uint32_t>(stream.master_seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream.stream_index)),
        stream_hi_(static_cast<std::uint32_t>(stream.stream_index >> 32)) {}

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    if (cursor_ == 2) refill();
    return uniforms_[cursor_++];
  }

  /// Standard normal via Box-Muller; each uniform pair yields two normals.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;

  static double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  void refill() noexcept {
    const Philox4x32::Block counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                    stream_lo_, stream_hi_};
    const auto out = Philox4x32::generate(counter, key_);
    ++block_;
    uniforms_[0] = to_open_unit((std::uint64_t{out[0]} << 32) | out[1]);
    uniforms_[1] = to_open_unit((std::uint64_t{out[2]} << 32) | out[3]);
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  std::array<double, 2> uniforms_{};
  int cursor_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pirhc

#endif  // PIRHC_RANDOM_HPP
