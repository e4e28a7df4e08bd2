#include "isingflip/spins.hpp"

#include <string>

#include "isingflip/error.hpp"

namespace isingflip {

SpinConfig::SpinConfig(std::size_t n, int fill) : n_(n), words_((n + 63) / 64, 0) {
  if (fill != 1 && fill != -1) {
    fail(ErrorKind::kInvalidArgument, "spin fill must be -1 or +1");
  }
  if (fill == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
}

SpinConfig SpinConfig::from_spins(std::span<const int> spins) {
  SpinConfig c(spins.size(), -1);
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] != 1 && spins[i] != -1) {
      fail(ErrorKind::kInvalidArgument,
           "spin " + std::to_string(i) + " is " + std::to_string(spins[i]) + ", not +-1");
    }
    c.set(i, spins[i]);
  }
  return c;
}

SpinConfig SpinConfig::from_index(std::size_t n, std::uint64_t bits) {
  if (n > 64) {
    fail(ErrorKind::kTooLarge, "from_index supports at most 64 sites");
  }
  SpinConfig c(n, -1);
  if (n > 0) {
    c.words_[0] = n == 64 ? bits : bits & ((std::uint64_t{1} << n) - 1);
  }
  return c;
}

void SpinConfig::set(std::size_t i, int spin) noexcept {
  const std::uint64_t bit = std::uint64_t{1} << (i & 63);
  if (spin > 0) {
    words_[i >> 6] |= bit;
  } else {
    words_[i >> 6] &= ~bit;
  }
}

std::vector<int> SpinConfig::to_vector() const {
  std::vector<int> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = spin(i);
  }
  return out;
}

}  // namespace isingflip
