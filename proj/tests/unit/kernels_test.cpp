#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"

#include "linearrag/error.hpp"
#include "linearrag/kernels.hpp"

using namespace linearrag;
using kernels::Backend;

namespace {

std::vector<float> random_floats(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<double> random_doubles(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Long-double reference, independent of either backend.
long double reference_dot(const std::vector<float>& a, const std::vector<float>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kernels::backend_available(Backend::avx2)) GTEST_SKIP() << "avx2 unavailable";
  }
};

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(kernels::backend_available(Backend::scalar));
  kernels::ScopedBackend scope(Backend::scalar);
  EXPECT_EQ(kernels::active_backend(), Backend::scalar);
  EXPECT_EQ(kernels::backend_name(Backend::scalar), "scalar");
}

TEST(Kernels, SizeMismatchThrows) {
  std::vector<float> a(4), b(5);
  try {
    kernels::dot(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dim_mismatch);
  }
}

TEST(Kernels, ScalarDotMatchesReference) {
  kernels::ScopedBackend scope(Backend::scalar);
  std::mt19937 rng(3);
  for (std::size_t n : {0u, 1u, 7u, 8u, 33u, 256u, 1000u}) {
    auto a = random_floats(rng, n), b = random_floats(rng, n);
    EXPECT_NEAR(kernels::dot(a, b), static_cast<double>(reference_dot(a, b)), 1e-12) << n;
  }
}

TEST_F(KernelEquivalence, Dot) {
  std::mt19937 rng(11);
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 15u, 16u, 31u, 64u, 255u, 256u, 1023u}) {
    auto a = random_floats(rng, n), b = random_floats(rng, n);
    double s, v;
    {
      kernels::ScopedBackend scope(Backend::scalar);
      s = kernels::dot(a, b);
    }
    {
      kernels::ScopedBackend scope(Backend::avx2);
      v = kernels::dot(a, b);
    }
    EXPECT_NEAR(s, v, 1e-12) << n;
  }
}

TEST_F(KernelEquivalence, DotRows) {
  std::mt19937 rng(5);
  const std::size_t dim = 37, rows = 19;
  auto m = random_floats(rng, dim * rows), q = random_floats(rng, dim);
  std::vector<double> s(rows), v(rows);
  {
    kernels::ScopedBackend scope(Backend::scalar);
    kernels::dot_rows(m, dim, q, s);
  }
  {
    kernels::ScopedBackend scope(Backend::avx2);
    kernels::dot_rows(m, dim, q, v);
  }
  for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(s[r], v[r], 1e-12);
}

TEST_F(KernelEquivalence, ElementwiseKernels) {
  std::mt19937 rng(9);
  for (std::size_t n : {1u, 3u, 4u, 5u, 17u, 100u}) {
    auto a = random_doubles(rng, n), b = random_doubles(rng, n);
    std::vector<double> s1(n), s2(n), s3(n), v1(n), v2(n), v3(n);
    double sl, vl;
    {
      kernels::ScopedBackend scope(Backend::scalar);
      kernels::damped_combine(a, b, 0.85, s1);
      kernels::multiply(a, b, s2);
      kernels::elementwise_max(a, b, s3);
      sl = kernels::l1_distance(a, b);
    }
    {
      kernels::ScopedBackend scope(Backend::avx2);
      kernels::damped_combine(a, b, 0.85, v1);
      kernels::multiply(a, b, v2);
      kernels::elementwise_max(a, b, v3);
      vl = kernels::l1_distance(a, b);
    }
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(s1[i], v1[i], 1e-15);
      EXPECT_EQ(s2[i], v2[i]);
      EXPECT_EQ(s3[i], v3[i]);
      EXPECT_DOUBLE_EQ(s1[i], 0.15 * a[i] + 0.85 * b[i]);
      EXPECT_EQ(s3[i], std::max(a[i], b[i]));
    }
    EXPECT_NEAR(sl, vl, 1e-12);
  }
}
