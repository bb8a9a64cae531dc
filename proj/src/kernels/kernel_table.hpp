#pragma once

#include <cstddef>

namespace linearrag::kernels::detail {

struct KernelTable {
  double (*dot)(const float* a, const float* b, std::size_t n);
  void (*dot_rows)(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
                   double* out);
  void (*damped_combine)(const double* reset, const double* propagated, double damping,
                         double* out, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  void (*elementwise_max)(const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

#if defined(LINEARRAG_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace linearrag::kernels::detail
