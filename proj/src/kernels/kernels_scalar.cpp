#include <algorithm>
#include <cmath>

#include "kernels/kernel_table.hpp"

namespace linearrag::kernels::detail {
namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void dot_rows_scalar(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
                     double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_scalar(rows + r * dim, query, dim);
}

void damped_combine_scalar(const double* reset, const double* propagated, double damping,
                           double* out, std::size_t n) {
  const double restart = 1.0 - damping;
  for (std::size_t i = 0; i < n; ++i) out[i] = restart * reset[i] + damping * propagated[i];
}

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::fabs(a[i] - b[i]);
  return sum;
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void elementwise_max_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(a[i], b[i]);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static constexpr KernelTable table{dot_scalar,          dot_rows_scalar,
                                     damped_combine_scalar, l1_distance_scalar,
                                     multiply_scalar,     elementwise_max_scalar};
  return table;
}

}  // namespace linearrag::kernels::detail
