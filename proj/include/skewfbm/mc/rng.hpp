#pragma once

#include <array>
#include <cstdint>

namespace skewfbm::mc {

/// (master_seed, path_index) identifies one independent substream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
};

/// Philox4x32-10 counter-based generator.
///
/// The key is the 64-bit master seed and the 128-bit counter is
/// (path_index, draw_block). Two substreams with different
/// (master_seed, path_index) pairs therefore never share a
/// (key, counter) input, so the substream map is injective by
/// construction. Output depends only on integer arithmetic and is identical
/// on every platform.
class Philox {
public:
  using result_type = std::uint32_t;

  explicit Philox(SeedSpec seed) : key_{lo(seed.master_seed), hi(seed.master_seed)}, path_(seed.path_index) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// 53-bit uniform in the open interval (0, 1).
  double uniform() {
    const std::uint64_t a = (*this)();
    const std::uint64_t b = (*this)();
    const std::uint64_t bits = ((a << 32) | b) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  std::uint64_t blocks_drawn() const { return block_; }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  void refill() {
    buf_ = block({lo(block_), hi(block_), lo(path_), hi(path_)}, key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derive a study-specific master seed so that two studies sharing a user
/// seed do not reuse the same substreams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag);

}  // namespace skewfbm::mc
