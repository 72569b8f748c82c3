#pragma once

#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/estimator.hpp"
#include "dynkde/kernels.hpp"
#include "dynkde/metrics.hpp"
#include "dynkde/summation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynkde {

/// AME = (1/m) sum_i |estimate(u_i) - truth(u_i)| over the midpoint grid.
template <class F, class G>
double ame(F&& estimate, G&& truth, const MetricGrid& grid)
{
  return pairwise_sum_of(0, grid.size(), [&](std::size_t i) {
           const double u = grid.points[i];
           return std::abs(estimate(u) - truth(u));
         }) /
         static_cast<double>(grid.size());
}

inline double ame(const DensityEstimate& estimate, const MapSystem& system, const MetricGrid& grid = MetricGrid{})
{
  return mean_abs_difference(estimate.evaluate(grid.points), density_values(system, grid));
}

enum class Norm
{
  l1,
  linf
};

/// L1 distance on (0, 1) by the midpoint rule, or the maximum over the grid points.
template <class F, class G>
double lp_distance(F&& f1, G&& f2, Norm p, const MetricGrid& grid)
{
  if (p == Norm::l1)
    return ame(f1, f2, grid); // the midpoint rule on (0, 1) has weight 1/m
  double worst = 0.0;
  for (double u : grid.points)
    worst = std::max(worst, std::abs(f1(u) - f2(u)));
  return worst;
}

enum class RateCase
{
  poly_tail,
  exp_tail,
  compact,
  linf
};

inline RateCase parse_rate_case(std::string_view name)
{
  if (name == "poly" || name == "poly_tail") return RateCase::poly_tail;
  if (name == "exp" || name == "exp_tail") return RateCase::exp_tail;
  if (name == "compact") return RateCase::compact;
  if (name == "linf") return RateCase::linf;
  throw InvalidArgument("unknown rate case: " + std::string(name));
}

/// Which exponent the logarithmic correction of the exponential-tail case uses.
/// `statement` uses d/gamma and `proof` uses d/eta; the stated bound and its derivation disagree here.
enum class LogCorrection
{
  statement,
  proof
};

struct RateQuery
{
  RateCase rate_case = RateCase::compact;
  std::uint64_t n = 1000;
  double alpha = 1.0;
  int d = 1;
  double gamma = 1.0;
  double eta = 1.0; // tail exponent (poly and exp cases)
  double a = 1.0;   // exp-tail scale; enters only the hidden constants
  LogCorrection correction = LogCorrection::statement;
};

struct RateSchedule
{
  double h = 0.0;
  double eps = 0.0;
};

inline RateSchedule rate_schedule(const RateQuery& q)
{
  detail::require(q.n >= 3, "rate schedule needs n >= 3 so that log n > 1");
  detail::require(q.alpha > 0.0 && q.alpha <= 1.0, "alpha must lie in (0, 1]");
  detail::require(q.d >= 1, "dimension must be >= 1");
  detail::require(q.gamma > 0.0, "gamma must be positive");
  const double n = static_cast<double>(q.n);
  const double log_n = std::log(n);
  const double d = q.d;
  const double base = std::pow(log_n, (2.0 + q.gamma) / q.gamma) / n;
  const double denom = 2.0 * q.alpha + d;

  switch (q.rate_case) {
  case RateCase::compact:
  case RateCase::linf:
    return {std::pow(base, 1.0 / denom), std::pow(base, q.alpha / denom)};
  case RateCase::poly_tail: {
    detail::require(q.eta > 0.0, "eta must be positive");
    const double den = (1.0 + q.eta) * denom - q.alpha;
    return {std::pow(base, (1.0 + q.eta) / den), std::pow(base, q.alpha * q.eta / den)};
  }
  case RateCase::exp_tail: {
    detail::require(q.eta > 0.0 && q.a > 0.0, "eta and a must be positive");
    const double k = q.correction == LogCorrection::statement ? q.gamma : q.eta;
    return {std::pow(base, 1.0 / denom) * std::pow(log_n, -(d / k) / denom),
            std::pow(base, q.alpha / denom) * std::pow(log_n, (d / k) * (q.alpha + d) / denom)};
  }
  }
  throw InvalidArgument("unknown rate case");
}

/// Constants of a geometrically C-mixing process together with the kernel
/// quantities entering the sample-size thresholds.
struct MixingConstants
{
  double c0 = 1.0;
  double b = 1.0;
  double gamma = 1.0;
  double K0 = 1.0;                                              // raw profile at the origin
  std::function<double(double)> phi = [](double h) { return 1.0 / h; }; // semi-norm bound of the kernel at h
  std::function<double(double)> psi = [](double r) { return 4.0 / (3.0 * r); };
};

enum class ThresholdMode
{
  n1,
  n2,
  n0_star
};

inline ThresholdMode parse_threshold_mode(std::string_view name)
{
  if (name == "n1") return ThresholdMode::n1;
  if (name == "n2") return ThresholdMode::n2;
  if (name == "n0_star" || name == "n0*") return ThresholdMode::n0_star;
  throw InvalidArgument("unknown threshold mode: " + std::string(name));
}

inline constexpr std::uint64_t threshold_scan_limit = 1'000'000'000;

namespace detail {

// smallest m >= 3 with m^power >= bound and m / (log m)^(2/gamma) >= 4.
// The second ratio decreases up to e^(2/gamma) and increases afterwards, so
// once both hold they keep holding; the scan starts at the first m allowed by
// the power bound.
inline std::uint64_t scan_threshold(double bound, int power, double gamma)
{
  const double root = std::pow(bound, 1.0 / power);
  require(std::isfinite(root), "threshold bound is not finite");
  if (root > static_cast<double>(threshold_scan_limit))
    throw NumericalError("sample-size threshold exceeds the scan limit of 1e9");
  std::uint64_t m = std::max<std::uint64_t>(3, static_cast<std::uint64_t>(std::ceil(root)));
  while (m > 3 && std::pow(static_cast<double>(m - 1), power) >= bound)
    --m;
  while (std::pow(static_cast<double>(m), power) < bound)
    ++m;
  const double k = 2.0 / gamma;
  for (; m <= threshold_scan_limit; ++m) {
    const double md = static_cast<double>(m);
    if (md / std::pow(std::log(md), k) >= 4.0)
      return m;
  }
  throw NumericalError("sample-size threshold exceeds the scan limit of 1e9");
}

} // namespace detail

/// Sample-size thresholds from the concentration arguments:
///   n1 = n0* : m >= (808 c0 (3 h^-d phi(h) + K(0)) / (2 K(0)))^(1/(d+1)), floor e^((d+1)/b)
///   n2       : m^2 >= 808 c0 (3 psi(r) + 1), floor e^(3/b)
/// together with m / (log m)^(2/gamma) >= 4.
inline std::uint64_t min_sample_size(const MixingConstants& mc, ThresholdMode mode, double h = 1.0, int d = 1,
                                     double r = 1.0)
{
  detail::require(mc.c0 > 0.0 && mc.b > 0.0 && mc.gamma > 0.0 && mc.K0 > 0.0,
                  "mixing constants must be positive");
  std::uint64_t m = 0;
  double floor_exponent = 0.0;
  if (mode == ThresholdMode::n2) {
    detail::require(r >= 1.0, "radius must be >= 1");
    const double psi = mc.psi(r);
    detail::require(psi > 0.0, "psi(r) must be positive");
    m = detail::scan_threshold(808.0 * mc.c0 * (3.0 * psi + 1.0), 2, mc.gamma);
    floor_exponent = 3.0 / mc.b;
  } else {
    detail::require(h > 0.0 && h <= 1.0, "bandwidth must lie in (0, 1]");
    detail::require(d >= 1, "dimension must be >= 1");
    const double phi = mc.phi(h);
    detail::require(phi > 0.0, "phi(h) must be positive");
    const double bound = 808.0 * mc.c0 * (3.0 * std::pow(h, -d) * phi + mc.K0) / (2.0 * mc.K0);
    m = detail::scan_threshold(bound, d + 1, mc.gamma);
    floor_exponent = (d + 1.0) / mc.b;
  }
  const double floor_value = std::ceil(std::exp(floor_exponent));
  if (floor_value > static_cast<double>(threshold_scan_limit))
    throw NumericalError("sample-size threshold exceeds the scan limit of 1e9");
  return std::max(m, static_cast<std::uint64_t>(floor_value));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y)
{
  detail::require(x.size() == y.size() && x.size() >= 2, "slope needs at least two matching points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw NumericalError("log-log regression needs positive values (zero error at some bandwidth)");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_sum(lx) / static_cast<double>(lx.size());
  const double my = pairwise_sum(ly) / static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  detail::require(sxx > 0.0, "slope needs at least two distinct abscissae");
  return sxy / sxx;
}

struct DecayResult
{
  std::vector<double> bandwidths;
  std::vector<double> sup_errors;
  double slope = 0.0;
};

/// Errors below this count as zero for the regression.
inline constexpr double decay_zero_tolerance = 1e-9;

/// sup over `interior` of |f_{P,h} - f| for each h, and the log-log slope of
/// those errors against h.
inline DecayResult holder_decay_check(const MapSystem& system, const NormalizedKernel& kernel,
                                      std::span<const double> h_sequence, std::span<const double> interior)
{
  detail::require(kernel.profile().holder_exponent() > 0.0,
                  "decay check needs a Hölder continuous kernel; the naive kernel is discontinuous");
  detail::require(h_sequence.size() >= 4, "decay check needs at least four bandwidths");
  detail::require(!interior.empty(), "decay check needs evaluation points");
  const double ratio = h_sequence[1] / h_sequence[0];
  for (std::size_t k = 1; k < h_sequence.size(); ++k) {
    detail::require(h_sequence[k] > 0.0, "bandwidths must be positive");
    detail::require(std::abs(h_sequence[k] / h_sequence[k - 1] - ratio) <= 1e-9 * std::abs(ratio),
                    "bandwidth sequence must be geometric");
  }
  DecayResult out;
  out.bandwidths.assign(h_sequence.begin(), h_sequence.end());
  for (double h : h_sequence) {
    double worst = 0.0;
    for (double x : interior)
      worst = std::max(worst, std::abs(smoothed_density(system, kernel, h, x) - system.invariant_density(x)));
    if (worst <= decay_zero_tolerance)
      throw NumericalError("smoothing error vanishes at h = " + std::to_string(h) + "; regression is degenerate");
    out.sup_errors.push_back(worst);
  }
  out.slope = loglog_slope(out.bandwidths, out.sup_errors);
  return out;
}

/// Equispaced points lo, lo + step, ..., hi.
inline std::vector<double> interior_grid(double lo = 0.1, double hi = 0.9, std::size_t count = 81)
{
  detail::require(count >= 2 && lo < hi, "interior grid needs lo < hi and two points");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

} // namespace dynkde
