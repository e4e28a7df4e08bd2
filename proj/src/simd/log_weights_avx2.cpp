#include <immintrin.h>

#include <vector>

#include "isingflip/simd/kernels.hpp"

namespace isingflip::simd::detail {

// Four consecutive configurations per vector; same operation order as the
// scalar kernel, so results agree bit for bit.
void log_weights_avx2(std::size_t n, std::span<const Coupling> couplings,
                      std::span<const double> fields, std::uint64_t first,
                      std::span<double> out) {
  const __m256d plus = _mm256_set1_pd(1.0);
  const __m256d minus = _mm256_set1_pd(-1.0);
  const __m256i one = _mm256_set1_epi64x(1);
  std::vector<double> spins(4 * n);
  std::size_t k = 0;
  for (; k + 4 <= out.size(); k += 4) {
    const auto base = static_cast<long long>(first + k);
    const __m256i idx = _mm256_setr_epi64x(base, base + 1, base + 2, base + 3);
    __m256d e = _mm256_setzero_pd();
    for (std::size_t i = 0; i < n; ++i) {
      const __m256i bit =
          _mm256_and_si256(_mm256_srl_epi64(idx, _mm_cvtsi64_si128(static_cast<long long>(i))), one);
      const __m256d x = _mm256_blendv_pd(minus, plus, _mm256_castsi256_pd(_mm256_cmpeq_epi64(bit, one)));
      _mm256_storeu_pd(spins.data() + 4 * i, x);
      e = _mm256_add_pd(e, _mm256_mul_pd(_mm256_set1_pd(fields[i]), x));
    }
    for (const auto& c : couplings) {
      const __m256d t = _mm256_mul_pd(_mm256_set1_pd(c.value), _mm256_loadu_pd(spins.data() + 4 * c.i));
      e = _mm256_add_pd(e, _mm256_mul_pd(t, _mm256_loadu_pd(spins.data() + 4 * c.j)));
    }
    _mm256_storeu_pd(out.data() + k, e);
  }
  if (k < out.size()) {
    log_weights_scalar(n, couplings, fields, first + k, out.subspan(k));
  }
}

}  // namespace isingflip::simd::detail
