#include "magtrace/kernels.hpp"

#if MAGTRACE_HAVE_AVX2

#include <immintrin.h>

#include <cmath>

namespace magtrace::kernels {

// IEEE add, sqrt and sub are correctly rounded in both paths, so lanes match
// the scalar reference bit for bit.
void shifted_sqrt_avx2(const double* nu, std::size_t n, double n2, double en, double* lam, double* shift) {
  const __m256d vn2 = _mm256_set1_pd(n2);
  const __m256d ven = _mm256_set1_pd(en);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_sqrt_pd(_mm256_add_pd(_mm256_loadu_pd(nu + i), vn2));
    _mm256_storeu_pd(lam + i, l);
    _mm256_storeu_pd(shift + i, _mm256_sub_pd(l, ven));
  }
  for (; i < n; ++i) {
    const double l = std::sqrt(nu[i] + n2);
    lam[i] = l;
    shift[i] = l - en;
  }
}

}  // namespace magtrace::kernels

#endif
