#include "isingflip/simd/kernels.hpp"

namespace isingflip::simd::detail {

void log_weights_scalar(std::size_t n, std::span<const Coupling> couplings,
                        std::span<const double> fields, std::uint64_t first,
                        std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::uint64_t idx = first + k;
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = ((idx >> i) & 1U) != 0 ? 1.0 : -1.0;
      e += fields[i] * s;
    }
    for (const auto& c : couplings) {
      const double si = ((idx >> c.i) & 1U) != 0 ? 1.0 : -1.0;
      const double sj = ((idx >> c.j) & 1U) != 0 ? 1.0 : -1.0;
      e += c.value * si * sj;
    }
    out[k] = e;
  }
}

}  // namespace isingflip::simd::detail
