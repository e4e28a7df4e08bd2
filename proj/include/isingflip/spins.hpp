#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isingflip {

/// Spin configuration in {-1,+1}^n packed one bit per site (bit set = +1).
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::size_t n, int fill = +1);

  /// Every entry must be -1 or +1.
  static SpinConfig from_spins(std::span<const int> spins);
  /// Bit k of `bits` is site k; requires n <= 64.
  static SpinConfig from_index(std::size_t n, std::uint64_t bits);

  std::size_t size() const noexcept { return n_; }

  int spin(std::size_t i) const noexcept {
    return ((words_[i >> 6] >> (i & 63)) & 1U) != 0 ? 1 : -1;
  }
  bool is_plus(std::size_t i) const noexcept {
    return ((words_[i >> 6] >> (i & 63)) & 1U) != 0;
  }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  void set(std::size_t i, int spin) noexcept;

  /// Packed bits of the first min(n, 64) sites.
  std::uint64_t index() const noexcept { return words_.empty() ? 0 : words_[0]; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::vector<int> to_vector() const;

  bool operator==(const SpinConfig&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace isingflip
