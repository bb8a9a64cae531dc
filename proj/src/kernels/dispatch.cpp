#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels/kernel_table.hpp"
#include "linearrag/error.hpp"
#include "linearrag/kernels.hpp"

namespace linearrag::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(LINEARRAG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable& table_for(Backend backend) noexcept {
#if defined(LINEARRAG_HAVE_AVX2)
  if (backend == Backend::avx2) return detail::avx2_table();
#endif
  (void)backend;
  return detail::scalar_table();
}

Backend initial_backend() noexcept {
  if (const char* forced = std::getenv("LINEARRAG_KERNELS"); forced && std::string(forced) == "scalar")
    return Backend::scalar;
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

const detail::KernelTable& active() noexcept { return table_for(current().load(std::memory_order_relaxed)); }

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(ErrorCode::dim_mismatch, std::string(what) + ": " + std::to_string(a) + " vs " +
                                             std::to_string(b));
}

}  // namespace

std::string_view backend_name(Backend backend) noexcept {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) noexcept {
  return backend == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_available(backend))
    throw Error(ErrorCode::config,
                "kernel backend '" + std::string(backend_name(backend)) + "' is not available");
  current().store(backend, std::memory_order_relaxed);
}

ScopedBackend::ScopedBackend(Backend backend) : previous_(active_backend()) { set_backend(backend); }

ScopedBackend::~ScopedBackend() { current().store(previous_, std::memory_order_relaxed); }

double dot(std::span<const float> a, std::span<const float> b) {
  require_same_size(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> query,
              std::span<double> out) {
  require_same_size(query.size(), dim, "dot_rows query");
  require_same_size(rows.size(), out.size() * dim, "dot_rows rows");
  if (out.empty()) return;
  active().dot_rows(rows.data(), out.size(), dim, query.data(), out.data());
}

void damped_combine(std::span<const double> reset, std::span<const double> propagated,
                    double damping, std::span<double> out) {
  require_same_size(reset.size(), propagated.size(), "damped_combine");
  require_same_size(reset.size(), out.size(), "damped_combine out");
  active().damped_combine(reset.data(), propagated.data(), damping, out.data(), out.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "l1_distance");
  return active().l1_distance(a.data(), b.data(), a.size());
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  require_same_size(a.size(), b.size(), "multiply");
  require_same_size(a.size(), out.size(), "multiply out");
  active().multiply(a.data(), b.data(), out.data(), out.size());
}

void elementwise_max(std::span<const double> a, std::span<const double> b,
                     std::span<double> out) {
  require_same_size(a.size(), b.size(), "elementwise_max");
  require_same_size(a.size(), out.size(), "elementwise_max out");
  active().elementwise_max(a.data(), b.data(), out.data(), out.size());
}

}  // namespace linearrag::kernels
