#include "isingflip/simd/kernels.hpp"

namespace isingflip::simd {

void cycle_scan(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                PatternCounts& out, Level level) {
  if (level == Level::kAvx2 && detected_level() == Level::kAvx2) {
    detail::cycle_scan_avx2(a, b, count, out);
  } else {
    detail::cycle_scan_scalar(a, b, count, out);
  }
}

void cycle_scan(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                PatternCounts& out) {
  cycle_scan(a, b, count, out, active_level());
}

void log_weights(std::size_t n, std::span<const Coupling> couplings,
                 std::span<const double> fields, std::uint64_t first, std::span<double> out,
                 Level level) {
  if (level == Level::kAvx2 && detected_level() == Level::kAvx2) {
    detail::log_weights_avx2(n, couplings, fields, first, out);
  } else {
    detail::log_weights_scalar(n, couplings, fields, first, out);
  }
}

void log_weights(std::size_t n, std::span<const Coupling> couplings,
                 std::span<const double> fields, std::uint64_t first, std::span<double> out) {
  log_weights(n, couplings, fields, first, out, active_level());
}

}  // namespace isingflip::simd
