#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "retrovert/allpass.hpp"
#include "retrovert/kernels.hpp"
#include "retrovert/reversal.hpp"
#include "support/random_models.hpp"

using namespace retrovert;

TEST(Kernels, SweepMatchesReference) {
  std::vector<std::complex<double>> pts = unit_circle_grid(1000);
  auto fn = [](std::complex<double> z) -> std::optional<double> {
    if (std::abs(z.imag()) < 1e-3) return std::nullopt;
    return std::abs(std::sin(7.0 * z.real()) * z.imag());
  };
  const auto a = kernels::sweep_max(pts, fn);
  const auto b = kernels::sweep_max_reference(pts, fn);
  EXPECT_EQ(a.max_deviation, b.max_deviation);
  EXPECT_EQ(a.evaluated, b.evaluated);
  EXPECT_EQ(a.skipped, b.skipped);
  EXPECT_EQ(a.evaluated + a.skipped, pts.size());
}

TEST(Kernels, SweepTreatsNanAsInfinite) {
  std::vector<std::complex<double>> pts(5);
  auto fn = [](std::complex<double>) -> std::optional<double> { return std::nan(""); };
  EXPECT_TRUE(std::isinf(kernels::sweep_max(pts, fn).max_deviation));
  EXPECT_TRUE(std::isinf(kernels::sweep_max_reference(pts, fn).max_deviation));
}

TEST(Kernels, CrossCovarianceMatchesReference) {
  std::mt19937_64 rng(4);
  const Matrix a = testkit::gaussian(rng, 5000, 3);
  const Matrix b = testkit::gaussian(rng, 5000, 2);
  const auto fast = kernels::cross_covariance(a, b, -3, 12);
  const auto ref = kernels::cross_covariance_reference(a, b, -3, 12);
  ASSERT_EQ(fast.size(), ref.size());
  for (std::size_t k = 0; k < fast.size(); ++k) {
    EXPECT_LE((fast[k] - ref[k]).cwiseAbs().maxCoeff(), 1e-13) << "lag " << int(k) - 3;
  }
}

TEST(Kernels, CrossCovarianceDefinition) {
  Matrix a(4, 1), b(4, 1);
  a << 1, 2, 3, 4;
  b << 1, 0, 0, 0;
  // lag k pairs a(t) with b(t-k); only b(0) is nonzero, so lag k picks a(k).
  const auto c = kernels::cross_covariance(a, b, 0, 3);
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(c[k](0, 0), (k + 1) / 4.0);
  const auto neg = kernels::cross_covariance(b, a, -2, -2);
  EXPECT_DOUBLE_EQ(neg[0](0, 0), 3.0 / 4.0);
}

TEST(Kernels, GridChecksMatchSerialReference) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const ForwardModel m = testkit::ensemble_model(seed);
    const ReversalResult r = reverse(m);
    const std::size_t grid = m.time_domain == TimeDomain::kDiscrete ? 256 : 61;
    EXPECT_EQ(check_allpass_grid(r.extension, grid),
              check_allpass_grid_reference(r.extension, grid));
    const auto f = check_factorization_grid(m, r, grid);
    const auto g = check_factorization_grid_reference(m, r, grid);
    EXPECT_EQ(f.max_deviation, g.max_deviation);
    EXPECT_EQ(f.evaluated, g.evaluated);
    EXPECT_EQ(f.skipped, g.skipped);
  }
}
