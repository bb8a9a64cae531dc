// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// is only entered after a runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels/kernel_table.hpp"

namespace linearrag::kernels::detail {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double dot_avx2(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)), acc1);
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void dot_rows_avx2(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
                   double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_avx2(rows + r * dim, query, dim);
}

void damped_combine_avx2(const double* reset, const double* propagated, double damping,
                         double* out, std::size_t n) {
  const double restart = 1.0 - damping;
  const __m256d vr = _mm256_set1_pd(restart);
  const __m256d vd = _mm256_set1_pd(damping);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d scaled = _mm256_mul_pd(vr, _mm256_loadu_pd(reset + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vd, _mm256_loadu_pd(propagated + i), scaled));
  }
  for (; i < n; ++i) out[i] = restart * reset[i] + damping * propagated[i];
}

double l1_distance_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, diff));
  }
  double sum = horizontal_sum(acc);
  for (; i < n; ++i) sum += std::fabs(a[i] - b[i]);
  return sum;
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void elementwise_max_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = std::max(a[i], b[i]);
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static constexpr KernelTable table{dot_avx2,          dot_rows_avx2,  damped_combine_avx2,
                                     l1_distance_avx2, multiply_avx2, elementwise_max_avx2};
  return table;
}

}  // namespace linearrag::kernels::detail
