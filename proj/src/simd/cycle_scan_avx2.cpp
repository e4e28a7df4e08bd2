#include <immintrin.h>

#include "isingflip/simd/kernels.hpp"

namespace isingflip::simd::detail {

void cycle_scan_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                     PatternCounts& out) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i m[3];
  __m256i inv[3];
  for (std::size_t p = 0; p < 3; ++p) {
    m[p] = _mm256_set1_epi8(static_cast<char>(kCycleMasks[p]));
    inv[p] = _mm256_set1_epi8(static_cast<char>(~kCycleMasks[p]));
  }
  std::size_t w = 0;
  for (; w + 32 <= count; w += 32) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + w));
    const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + w));
    // windows where either site is silent cannot match; most blocks are skipped here
    const __m256i silent = _mm256_or_si256(_mm256_cmpeq_epi8(x, zero), _mm256_cmpeq_epi8(y, zero));
    if (static_cast<std::uint32_t>(_mm256_movemask_epi8(silent)) == 0xFFFFFFFFU) {
      continue;
    }
    for (std::size_t p = 0; p < 3; ++p) {
      const __m256i fwd = _mm256_and_si256(_mm256_cmpeq_epi8(x, m[p]), _mm256_cmpeq_epi8(y, inv[p]));
      const __m256i bwd = _mm256_and_si256(_mm256_cmpeq_epi8(y, m[p]), _mm256_cmpeq_epi8(x, inv[p]));
      out.forward[p] += static_cast<std::uint64_t>(
          __builtin_popcount(static_cast<std::uint32_t>(_mm256_movemask_epi8(fwd))));
      out.backward[p] += static_cast<std::uint64_t>(
          __builtin_popcount(static_cast<std::uint32_t>(_mm256_movemask_epi8(bwd))));
    }
  }
  if (w < count) {
    cycle_scan_scalar(a + w, b + w, count - w, out);
  }
}

}  // namespace isingflip::simd::detail
