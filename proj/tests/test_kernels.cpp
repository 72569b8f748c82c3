#include "dynkde/kernels.hpp"
#include "dynkde/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace dynkde;

namespace {

const KernelKind all_kinds[] = {KernelKind::naive, KernelKind::triangle, KernelKind::epanechnikov,
                                KernelKind::gaussian};

// Surface area of the unit sphere in R^d, written independently of the library.
double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0); }

} // namespace

TEST(Kernels, NormalizationConstantExamples)
{
  EXPECT_NEAR(normalization_constant(KernelKind::naive, 1), 2.0, 1e-14);
  EXPECT_NEAR(normalization_constant(KernelKind::epanechnikov, 1), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(normalization_constant(KernelKind::triangle, 1), 1.0, 1e-14);
  EXPECT_NEAR(normalization_constant(KernelKind::gaussian, 1), std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(normalization_constant(KernelKind::gaussian, 2), std::numbers::pi, 1e-13);
}

TEST(Kernels, ClosedFormMatchesNumericRadialMoment)
{
  for (auto kind : all_kinds) {
    for (int d = 1; d <= 4; ++d) {
      const double numeric = d * unit_ball_volume(d) * radial_moment_numeric(KernelProfile(kind), d, 1);
      EXPECT_NEAR(normalization_constant(kind, d) / numeric, 1.0, 1e-9) << to_string(kind) << " d=" << d;
    }
  }
}

TEST(Kernels, NormalizedKernelIntegratesToOne)
{
  for (auto kind : all_kinds) {
    for (int d = 1; d <= 3; ++d) {
      const NormalizedKernel k(kind, d);
      const double upper = kind == KernelKind::gaussian ? 8.5 : 1.0;
      const double mass = sphere_area(d) * quad::adaptive_kronrod(
                                               [&](double r) { return k(r) * std::pow(r, d - 1); }, 0.0, upper,
                                               1e-12, 1e-15);
      EXPECT_NEAR(mass, 1.0, 1e-6) << to_string(kind) << " d=" << d;
    }
  }
}

TEST(Kernels, OneDimensionalMassByDirectIntegration)
{
  for (auto kind : all_kinds) {
    const NormalizedKernel k(kind);
    const double r = kind == KernelKind::gaussian ? 8.5 : 1.0;
    const double mass = quad::adaptive_kronrod([&](double x) { return k(std::abs(x)); }, -r, 0.0, 1e-12, 1e-15) +
                        quad::adaptive_kronrod([&](double x) { return k(std::abs(x)); }, 0.0, r, 1e-12, 1e-15);
    EXPECT_NEAR(mass, 1.0, 1e-8) << to_string(kind);
  }
}

TEST(Kernels, L2NormExamples)
{
  EXPECT_NEAR(kernel_l2_norm(NormalizedKernel(KernelKind::naive)), 0.5, 1e-14);
  EXPECT_NEAR(kernel_l2_norm(NormalizedKernel(KernelKind::gaussian)), 1.0 / std::sqrt(2.0 * std::numbers::pi),
              1e-14);
  EXPECT_NEAR(kernel_l2_norm(NormalizedKernel(KernelKind::triangle)), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(kernel_l2_norm(NormalizedKernel(KernelKind::epanechnikov)), 0.6, 1e-14);
}

TEST(Kernels, L2NormMatchesQuadratureInSeveralDimensions)
{
  for (auto kind : all_kinds) {
    for (int d = 1; d <= 3; ++d) {
      const NormalizedKernel k(kind, d);
      const double upper = kind == KernelKind::gaussian ? 8.5 : 1.0;
      const double numeric = sphere_area(d) * quad::adaptive_kronrod(
                                                  [&](double r) { return k(r) * k(r) * std::pow(r, d - 1); }, 0.0,
                                                  upper, 1e-12, 1e-15);
      EXPECT_NEAR(kernel_l2_norm(k) / numeric, 1.0, 1e-9) << to_string(kind) << " d=" << d;
    }
  }
}

TEST(Kernels, KernelHExamples)
{
  EXPECT_NEAR(kernel_h(NormalizedKernel(KernelKind::naive), 0.5, 0.2), 1.0, 1e-15);
  EXPECT_NEAR(kernel_h(NormalizedKernel(KernelKind::gaussian), 1.0, 0.0), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  for (auto kind : {KernelKind::naive, KernelKind::triangle, KernelKind::epanechnikov})
    EXPECT_EQ(kernel_h(NormalizedKernel(kind), 0.3, 0.31), 0.0);
}

TEST(Kernels, NaiveProfileTakesMidpointValueAtItsJump)
{
  const KernelProfile naive(KernelKind::naive);
  EXPECT_EQ(naive(0.999), 1.0);
  EXPECT_EQ(naive(1.0), 0.5);
  EXPECT_EQ(naive(1.001), 0.0);
}

TEST(Kernels, ScalingIdentity)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto kind : all_kinds) {
    for (int d = 1; d <= 3; ++d) {
      const NormalizedKernel k(kind, d);
      for (double h : {0.1, 0.5, 2.0}) {
        for (int rep = 0; rep < 20; ++rep) {
          std::vector<double> x(static_cast<std::size_t>(d)), xs(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = u(rng) * h;
            xs[i] = x[i] / h;
          }
          const double lhs = kernel_h(k, h, x);
          const double rhs = std::pow(h, -d) * kernel_h(k, 1.0, xs);
          EXPECT_NEAR(lhs, rhs, 1e-14 * std::max(1.0, std::abs(rhs)));
        }
      }
    }
  }
}

TEST(Kernels, ProfilesAreNonnegativeAndNonIncreasing)
{
  for (auto kind : all_kinds) {
    const KernelProfile p(kind);
    double prev = p(0.0);
    for (int i = 1; i <= 5000; ++i) {
      const double v = p(i * 1e-3);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(Kernels, KernelHMonotoneInNorm)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto kind : all_kinds) {
    const NormalizedKernel k(kind, 2);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> a{u(rng), u(rng)}, b{u(rng), u(rng)};
      if (std::hypot(a[0], a[1]) > std::hypot(b[0], b[1]))
        std::swap(a, b);
      EXPECT_GE(kernel_h(k, 0.7, a), kernel_h(k, 0.7, b));
    }
  }
}

TEST(Kernels, InvalidArguments)
{
  EXPECT_THROW(normalization_constant(KernelKind::gaussian, 0), InvalidArgument);
  EXPECT_THROW(parse_kernel_kind("cosine"), InvalidArgument);
  const NormalizedKernel k(KernelKind::triangle, 2);
  const std::vector<double> one{0.1};
  EXPECT_THROW(kernel_h(k, 1.0, one), InvalidArgument);
  EXPECT_THROW(kernel_h(NormalizedKernel(KernelKind::triangle), 0.0, 0.1), InvalidArgument);
}

TEST(Kernels, HolderExponentMarksNaiveAsDiscontinuous)
{
  EXPECT_EQ(KernelProfile(KernelKind::naive).holder_exponent(), 0.0);
  EXPECT_GT(KernelProfile(KernelKind::triangle).holder_exponent(), 0.0);
}
