#include "isingflip/simd/kernels.hpp"

namespace isingflip::simd::detail {

void cycle_scan_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                       PatternCounts& out) {
  for (std::size_t w = 0; w < count; ++w) {
    const std::uint8_t x = a[w];
    const std::uint8_t y = b[w];
    if (x == 0 || y == 0) {
      continue;
    }
    for (std::size_t p = 0; p < kCycleMasks.size(); ++p) {
      const std::uint8_t m = kCycleMasks[p];
      const auto inv = static_cast<std::uint8_t>(~m);
      out.forward[p] += static_cast<std::uint64_t>(x == m && y == inv);
      out.backward[p] += static_cast<std::uint64_t>(y == m && x == inv);
    }
  }
}

}  // namespace isingflip::simd::detail
