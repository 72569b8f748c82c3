#include "dynkde/dynsys.hpp"
#include "dynkde/quadrature.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace dynkde;

namespace {

// Kolmogorov-Smirnov distance between the empirical law of `x` and `cdf`.
template <class Cdf>
double ks_distance(std::vector<double> x, Cdf&& cdf)
{
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return worst;
}

// Parry density of the beta map by direct summation of 200 terms of the
// series sum_i beta^-(i+1) 1[x < T^i(1)], orbit in long double.
double beta_density_bruteforce(long double beta, double x)
{
  long double orbit = 1.0L, weight = 1.0L / beta, at_x = 0.0L, mass = 0.0L;
  for (int i = 0; i < 200; ++i) {
    if (x < orbit)
      at_x += weight;
    mass += weight * orbit;
    orbit = beta * orbit;
    orbit -= std::floor(orbit);
    weight /= beta;
  }
  return static_cast<double>(at_x / mass);
}

} // namespace

TEST(DynSys, IterateExamples)
{
  EXPECT_DOUBLE_EQ(MapSystem::logistic().iterate(0.5), 1.0);
  EXPECT_NEAR(MapSystem::gauss().iterate(0.4), 0.5, 1e-15);
  EXPECT_NEAR(MapSystem::beta(2.0).iterate(0.3), 0.6, 1e-15);
  EXPECT_THROW(MapSystem::gauss().iterate(0.0), InvalidArgument);
  EXPECT_THROW(MapSystem::logistic().iterate(1.0), InvalidArgument);
}

TEST(DynSys, InvariantDensityExamples)
{
  EXPECT_NEAR(MapSystem::logistic().invariant_density(0.5), 2.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(MapSystem::gauss().invariant_density(1e-14), 1.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(MapSystem::gauss().invariant_density(1.0 - 1e-14), 0.5 / std::log(2.0), 1e-12);
  EXPECT_THROW(MapSystem::gauss().invariant_density(0.0), InvalidArgument);
  EXPECT_THROW(MapSystem::logistic(3.7).invariant_density(0.5), InvalidArgument);
}

TEST(DynSys, GoldenBetaDensityMatchesClosedForm)
{
  // T(1) = 1/phi and T^2(1) = 0, so f = c (1/phi + 1/phi^2 1[x < 1/phi])
  const double phi = std::numbers::phi;
  const double c = 1.0 / (1.0 / phi + 1.0 / (phi * phi * phi));
  const auto beta = MapSystem::beta();
  EXPECT_NEAR(beta.invariant_density(0.2), c * (1.0 / phi + 1.0 / (phi * phi)), 1e-12);
  EXPECT_NEAR(beta.invariant_density(0.7), c / phi, 1e-12);
  EXPECT_NEAR(beta.invariant_cdf(1.0 / phi), c * (1.0 / phi + 1.0 / (phi * phi)) / phi, 1e-12);
}

TEST(DynSys, BetaDensityMatchesBruteForceSeries)
{
  for (double b : {std::numbers::e, 3.3, 1.5}) {
    const auto beta = MapSystem::beta(b);
    for (double x : {0.05, 0.2, 0.45, 0.77, 0.93}) {
      const auto jumps = beta.density_jumps();
      const bool near_jump =
        std::any_of(jumps.begin(), jumps.end(), [&](double j) { return std::abs(j - x) < 1e-6; });
      if (near_jump)
        continue;
      EXPECT_NEAR(beta.invariant_density(x), beta_density_bruteforce(b, x), 1e-9) << "beta=" << b << " x=" << x;
    }
  }
}

TEST(DynSys, BetaTwoIsUniform)
{
  const auto beta = MapSystem::beta(2.0);
  for (double x : {0.01, 0.3, 0.5, 0.99})
    EXPECT_NEAR(beta.invariant_density(x), 1.0, 1e-12);
}

TEST(DynSys, DensitiesIntegrateToOne)
{
  for (auto sys : {MapSystem::logistic(), MapSystem::gauss(), MapSystem::beta(), MapSystem::beta(2.7)}) {
    // split at the density jumps so every piece is smooth up to endpoint singularities
    std::vector<double> cuts{0.0};
    for (double j : sys.density_jumps())
      if (j > 0.0 && j < 1.0)
        cuts.push_back(j);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
      const double piece = quad::adaptive_kronrod([&](double x) { return sys.density_or_zero(x); }, cuts[k - 1],
                                                  cuts[k], 1e-11, 1e-13, 100000);
      total += piece;
      EXPECT_NEAR(sys.invariant_cdf(cuts[k]) - sys.invariant_cdf(cuts[k - 1]), piece, 1e-8) << sys.name();
    }
    EXPECT_NEAR(total, 1.0, 1e-8) << sys.name();
  }
}

TEST(DynSys, InverseCdfExamples)
{
  EXPECT_NEAR(MapSystem::logistic().inverse_cdf(0.5), 0.5, 1e-15);
  EXPECT_NEAR(MapSystem::gauss().inverse_cdf(1.0), 1.0, 1e-15);
  EXPECT_NEAR(MapSystem::gauss().inverse_cdf(0.5), std::sqrt(2.0) - 1.0, 1e-15);
  for (double u : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(MapSystem::logistic().invariant_cdf(MapSystem::logistic().inverse_cdf(u)), u, 1e-13);
    EXPECT_NEAR(MapSystem::gauss().invariant_cdf(MapSystem::gauss().inverse_cdf(u)), u, 1e-13);
  }
  EXPECT_THROW(MapSystem::beta().inverse_cdf(0.5), InvalidArgument);
}

TEST(DynSys, HandIteratedTrajectory)
{
  TrajectoryConfig cfg;
  cfg.n = 3;
  cfg.sigma = 0.0;
  cfg.x0 = 0.2;
  const auto s = generate_trajectory(MapSystem::logistic(), cfg);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s.values[0], 0.64, 1e-15);
  EXPECT_NEAR(s.values[1], 0.9216, 1e-15);
  EXPECT_NEAR(s.values[2], 4.0 * 0.9216 * 0.0784, 1e-15);
  ASSERT_TRUE(s.meta.has_value());
  EXPECT_EQ(s.meta->x0, 0.2);
}

TEST(DynSys, SingleStep)
{
  TrajectoryConfig cfg;
  cfg.n = 1;
  cfg.sigma = 0.0;
  cfg.x0 = 0.3;
  EXPECT_NEAR(generate_trajectory(MapSystem::gauss(), cfg).values.at(0), 1.0 / 0.3 - 3.0, 1e-15);
}

TEST(DynSys, DeterministicGivenSeed)
{
  TrajectoryConfig cfg;
  cfg.n = 500;
  cfg.seed = 99;
  for (auto sys : {MapSystem::logistic(), MapSystem::gauss(), MapSystem::beta()}) {
    const auto a = generate_trajectory(sys, cfg);
    const auto b = generate_trajectory(sys, cfg);
    EXPECT_EQ(a.values, b.values);
  }
  auto other = cfg;
  other.seed = 100;
  EXPECT_NE(generate_trajectory(MapSystem::gauss(), cfg).values,
            generate_trajectory(MapSystem::gauss(), other).values);
}

TEST(DynSys, GaussTrajectoryMean)
{
  TrajectoryConfig cfg;
  cfg.n = 1000;
  cfg.sigma = 0.01;
  cfg.seed = 42;
  const auto s = generate_trajectory(MapSystem::gauss(), cfg);
  double mean = 0.0;
  for (double v : s.values)
    mean += v;
  mean /= static_cast<double>(s.size());
  // moments of the Gauss density by midpoint quadrature; the noise adds sigma^2 = 1e-4 to the variance
  const auto gauss = MapSystem::gauss();
  double ex = 0.0, ex2 = 0.0;
  const int m = 100000;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m;
    ex += x * gauss.invariant_density(x) / m;
    ex2 += x * x * gauss.invariant_density(x) / m;
  }
  EXPECT_NEAR(ex, 1.0 / std::log(2.0) - 1.0, 1e-8);
  const double se = std::sqrt((ex2 - ex * ex + 1e-4) / 1000.0);
  EXPECT_NEAR(mean, 1.0 / std::log(2.0) - 1.0, 3.0 * se);
}

TEST(DynSys, EmpiricalLawMatchesInvariantCdf)
{
  for (auto sys : {MapSystem::logistic(), MapSystem::gauss(), MapSystem::beta(), MapSystem::beta(2.7)}) {
    TrajectoryConfig cfg;
    cfg.n = 101000;
    cfg.sigma = 0.0;
    cfg.seed = 5;
    auto s = generate_trajectory(sys, cfg);
    std::vector<double> tail(s.values.begin() + 1000, s.values.end());
    EXPECT_LT(ks_distance(tail, [&](double x) { return sys.invariant_cdf(x); }), 0.02) << sys.name();
  }
}

TEST(DynSys, NoiseIsNotClipped)
{
  TrajectoryConfig cfg;
  cfg.n = 20000;
  cfg.sigma = 0.01;
  cfg.seed = 3;
  const auto s = generate_trajectory(MapSystem::logistic(), cfg);
  const auto outside = std::count_if(s.values.begin(), s.values.end(), [](double v) { return v < 0.0 || v > 1.0; });
  EXPECT_GT(outside, 0);
}

TEST(DynSys, ExplicitDegenerateStartIsAnError)
{
  TrajectoryConfig cfg;
  cfg.n = 5;
  cfg.sigma = 0.0;
  cfg.x0 = 0.5; // logistic: 0.5 -> 1 -> 0
  EXPECT_THROW(generate_trajectory(MapSystem::logistic(), cfg), DegenerateOrbit);
  cfg.x0 = 0.75; // fixed point of the logistic map
  EXPECT_THROW(generate_trajectory(MapSystem::logistic(), cfg), DegenerateOrbit);
}

TEST(DynSys, DyadicBetaOrbitCollapsesAfterRetries)
{
  // beta = 2 shifts out one mantissa bit per step and reaches 0 in floating point
  TrajectoryConfig cfg;
  cfg.n = 200;
  cfg.seed = 1;
  EXPECT_THROW(generate_trajectory(MapSystem::beta(2.0), cfg), DegenerateOrbit);
}

TEST(DynSys, InvalidConfigurations)
{
  TrajectoryConfig cfg;
  cfg.n = 0;
  EXPECT_THROW(generate_trajectory(MapSystem::gauss(), cfg), InvalidArgument);
  cfg.n = 10;
  cfg.sigma = -1.0;
  EXPECT_THROW(generate_trajectory(MapSystem::gauss(), cfg), InvalidArgument);
  cfg.sigma = 0.0;
  cfg.x0 = 1.5;
  EXPECT_THROW(generate_trajectory(MapSystem::gauss(), cfg), InvalidArgument);
  EXPECT_THROW(MapSystem::beta(1.0), InvalidArgument);
  EXPECT_THROW(parse_system_kind("henon"), InvalidArgument);
}

TEST(DynSys, DerivedSeedsDifferAcrossCells)
{
  const auto a = derive_seed(1, SystemKind::gauss, 500, 0);
  EXPECT_NE(a, derive_seed(1, SystemKind::gauss, 500, 1));
  EXPECT_NE(a, derive_seed(1, SystemKind::logistic, 500, 0));
  EXPECT_NE(a, derive_seed(1, SystemKind::gauss, 1000, 0));
  EXPECT_NE(a, derive_seed(2, SystemKind::gauss, 500, 0));
  EXPECT_EQ(a, derive_seed(1, SystemKind::gauss, 500, 0));
}

TEST(DynSys, UniformOpenIntervalNeverHitsEndpoints)
{
  Rng rng(0);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
