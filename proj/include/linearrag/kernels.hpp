#pragma once

// Dense arithmetic kernels used by scoring and PageRank.
//
// Every kernel has a scalar reference implementation and, where the build and
// the CPU allow it, an AVX2/FMA variant. The variant is chosen once at first
// use (LINEARRAG_KERNELS=scalar forces the reference path) and can be switched
// explicitly for equivalence testing. Float inputs are accumulated in double.

#include <cstddef>
#include <span>
#include <string_view>

namespace linearrag::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend backend) noexcept;
bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;

/// Throws Error(config) when the backend is not available on this CPU/build.
void set_backend(Backend backend);

/// Restores a backend on scope exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

double dot(std::span<const float> a, std::span<const float> b);

/// out[i] = <rows[i*dim .. (i+1)*dim), query>; rows.size() == out.size() * dim.
void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> query,
              std::span<double> out);

/// out = (1 - damping) * reset + damping * propagated
void damped_combine(std::span<const double> reset, std::span<const double> propagated,
                    double damping, std::span<double> out);

double l1_distance(std::span<const double> a, std::span<const double> b);

/// out = a * b (elementwise)
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// out = max(a, b) (elementwise)
void elementwise_max(std::span<const double> a, std::span<const double> b,
                     std::span<double> out);

}  // namespace linearrag::kernels
