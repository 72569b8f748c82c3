#pragma once

#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/estimator.hpp"
#include "dynkde/gauss_transform.hpp"
#include "dynkde/kernels.hpp"
#include "dynkde/metrics.hpp"
#include "dynkde/summation.hpp"
#include "dynkde/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynkde {

/// Candidate bandwidths: `count` equispaced values from h_lo to h_hi inclusive.
struct BandwidthGrid
{
  double h_lo = 0.0;
  double h_hi = 0.0;
  std::vector<double> values;
  bool degenerate = false; // the oversmoothing bound fell below the smallest gap

  std::size_t size() const { return values.size(); }
};

inline constexpr double min_grid_bandwidth = 1e-12;

inline BandwidthGrid make_grid(double h_lo, double h_hi, std::size_t count)
{
  detail::require(h_lo > 0.0 && h_lo <= h_hi, "grid needs 0 < h_lo <= h_hi");
  detail::require(count >= 1, "grid needs at least one value");
  detail::require(count == 1 || h_lo < h_hi, "a grid of several values needs h_lo < h_hi");
  BandwidthGrid grid;
  grid.h_lo = h_lo;
  grid.h_hi = h_hi;
  grid.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid.values[k] = h_lo + t * (h_hi - h_lo);
  }
  grid.values.back() = h_hi;
  return grid;
}

/// Oversmoothed bandwidth 3 sigma (R(Kbar) / (35 n))^(1/5).
inline double oversmoothed_bandwidth(double sigma, std::size_t n, const NormalizedKernel& kernel)
{
  return 3.0 * sigma * std::pow(kernel_l2_norm(kernel) / (35.0 * static_cast<double>(n)), 0.2);
}

inline double sample_std(std::span<const double> x)
{
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  const double ss = pairwise_sum_of(0, x.size(), [&](std::size_t i) {
    const double d = x[i] - mean;
    return d * d;
  });
  return std::sqrt(ss / (n - 1.0));
}

/// Grid from the smallest gap between sorted observations up to the
/// oversmoothed bandwidth.
inline BandwidthGrid bandwidth_grid(const Sample& sample, const NormalizedKernel& kernel, std::size_t count = 100)
{
  const std::size_t n = sample.size();
  detail::require(n >= 2, "bandwidth grid needs at least two observations");
  detail::require_finite(sample.values);
  std::vector<double> sorted(sample.values);
  std::sort(sorted.begin(), sorted.end());
  detail::require(sorted.front() < sorted.back(), "bandwidth grid needs a sample with positive variance");

  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i)
    gap = std::min(gap, sorted[i] - sorted[i - 1]);
  const double h_lo = std::max(gap, min_grid_bandwidth);
  double h_hi = oversmoothed_bandwidth(sample_std(sample.values), n, kernel);
  bool degenerate = false;
  if (h_hi < h_lo) {
    h_hi = 2.0 * h_lo;
    degenerate = true;
  }
  if (h_hi == h_lo)
    h_hi = std::nextafter(h_lo, INFINITY);
  auto grid = make_grid(h_lo, h_hi, count);
  grid.degenerate = degenerate;
  return grid;
}

enum class QuadratureRule
{
  exact,   ///< closed-form piecewise integration (compact kernels) or Gaussian convolution identity
  midpoint ///< midpoint rule on the extended support
};

struct QuadratureConfig
{
  QuadratureRule rule = QuadratureRule::exact;
  std::size_t points = std::size_t{1} << 14;
};

namespace detail {

template <class F>
double midpoint_over(double a, double b, std::size_t points, F&& values_at)
{
  require(points >= 1, "midpoint rule needs at least one point");
  const double width = (b - a) / static_cast<double>(points);
  std::vector<double> u(points);
  for (std::size_t k = 0; k < points; ++k)
    u[k] = a + (static_cast<double>(k) + 0.5) * width;
  const std::vector<double> v = values_at(u);
  return width * pairwise_sum(v);
}

inline bool use_direct(Evaluation method) { return method == Evaluation::direct; }

// (1/n) sum_i S_i^{(l)} / #{j : |j - i| > l}, where S_i^{(l)} drops the temporal neighbours from S_i.
inline double mean_windowed_term(std::span<const double> x, std::span<const double> loo,
                                 const NormalizedKernel& kernel, double h, std::size_t window)
{
  const std::size_t n = x.size();
  const double total = pairwise_sum_of(0, n, [&](std::size_t i) {
    double s = loo[i];
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(n - 1, i + window);
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != i)
        s -= kernel(std::abs(x[i] - x[j]) / h);
    return std::max(0.0, s) / static_cast<double>(mloo_count(n, i, window));
  });
  return total / static_cast<double>(n);
}

} // namespace detail

/// int f_{D,h}(x)^2 dx over the real line.
inline double integrated_square(std::span<const double> sorted, const NormalizedKernel& kernel, double h,
                                const QuadratureConfig& quad = {}, Evaluation method = Evaluation::automatic)
{
  detail::require(h > 0.0, "bandwidth must be positive");
  detail::require(!sorted.empty(), "integrated_square needs a nonempty sample");
  const double n = static_cast<double>(sorted.size());

  if (quad.rule == QuadratureRule::midpoint) {
    const DensityEstimate est(sorted, kernel, h);
    const double reach = est.reach();
    return detail::midpoint_over(sorted.front() - reach, sorted.back() + reach, quad.points,
                                 [&](const std::vector<double>& u) {
                                   auto f = est.evaluate(u, method);
                                   for (double& v : f)
                                     v *= v;
                                   return f;
                                 });
  }

  if (kernel.kind() == KernelKind::gaussian) {
    // K_h * K_h is the normal density with variance h^2
    const auto g = gauss_transform(sorted, sorted, std::numbers::sqrt2 * h, method);
    return pairwise_sum(g) / (n * n * h * std::sqrt(2.0 * std::numbers::pi));
  }

  std::vector<double> pieces;
  detail::sweep_compact(sorted, h, detail::use_direct(method), [&](const detail::Segment& seg) {
    pieces.push_back(detail::integrate_square(detail::profile_sum(kernel.kind(), seg), seg.length));
  });
  return pairwise_sum(pieces) / (kernel.kappa() * kernel.kappa() * n * n * h);
}

/// Leave-one-out kernel sums S_i = sum_{j != i} Kbar(|x_i - x_j| / h), in sample order.
inline std::vector<double> loo_kernel_sums(const Sample& sample, std::span<const double> sorted,
                                           const NormalizedKernel& kernel, double h,
                                           Evaluation method = Evaluation::automatic)
{
  auto sums = detail::kernel_sums(sorted, kernel, h, sample.values, method);
  const double self = kernel.at_origin();
  for (double& s : sums)
    s = std::max(0.0, s - self);
  return sums;
}

/// The three cross-validation criteria at one bandwidth, sharing one pass over the sample.
struct CrossValidationScores
{
  double integrated_square = 0.0;
  double lscv = 0.0;
  double mlscv1 = 0.0;
  double mlscv2 = 0.0;
};

inline CrossValidationScores cross_validation_scores(const Sample& sample, std::span<const double> sorted,
                                                     const NormalizedKernel& kernel, double h,
                                                     const QuadratureConfig& quad = {},
                                                     Evaluation method = Evaluation::automatic)
{
  const std::size_t n = sample.size();
  detail::require(n >= 2, "cross-validation needs at least two observations");
  detail::require(h > 0.0, "bandwidth must be positive");
  const auto& x = sample.values;
  const auto loo = loo_kernel_sums(sample, sorted, kernel, h, method);

  CrossValidationScores out;
  out.integrated_square = integrated_square(sorted, kernel, h, quad, method);

  const double nd = static_cast<double>(n);
  out.lscv = out.integrated_square - 2.0 / nd * pairwise_sum(loo) / ((nd - 1.0) * h);

  auto modified = [&](std::size_t window) {
    if (n < 2 * window + 2)
      return std::numeric_limits<double>::quiet_NaN();
    return out.integrated_square - 2.0 * detail::mean_windowed_term(x, loo, kernel, h, window) / h;
  };
  out.mlscv1 = modified(1);
  out.mlscv2 = modified(2);
  return out;
}

/// LSCV(h) = int f^2 - (2/n) sum_i fhat_{-i,h}(x_i).
inline double lscv_score(const Sample& sample, const NormalizedKernel& kernel, double h,
                         const QuadratureConfig& quad = {}, Evaluation method = Evaluation::automatic)
{
  detail::require(sample.size() >= 2, "LSCV needs at least two observations");
  const auto sorted = detail::sorted_copy(sample.values);
  const auto loo = loo_kernel_sums(sample, *sorted, kernel, h, method);
  const double n = static_cast<double>(sample.size());
  return integrated_square(*sorted, kernel, h, quad, method) - 2.0 / n * pairwise_sum(loo) / ((n - 1.0) * h);
}

/// MLSCV(h) with temporal window l: the leave-out estimates drop |j - i| <= l.
inline double mlscv_score(const Sample& sample, const NormalizedKernel& kernel, double h, std::size_t window,
                          const QuadratureConfig& quad = {}, Evaluation method = Evaluation::automatic)
{
  const std::size_t n = sample.size();
  detail::require(n >= 2 * window + 2, "sample too small for the MLSCV window");
  const auto sorted = detail::sorted_copy(sample.values);
  const auto loo = loo_kernel_sums(sample, *sorted, kernel, h, method);
  return integrated_square(*sorted, kernel, h, quad, method) -
         2.0 * detail::mean_windowed_term(sample.values, loo, kernel, h, window) / h;
}

/// DKM(h) = int |f_{D,h,K} - f_{D,h,L}| with one common bandwidth for both kernels.
inline double dkm_score(std::span<const double> sorted, double h, const NormalizedKernel& first,
                        const NormalizedKernel& second, const QuadratureConfig& quad = {},
                        Evaluation method = Evaluation::automatic)
{
  detail::require(h > 0.0, "bandwidth must be positive");
  detail::require(!sorted.empty(), "DKM needs a nonempty sample");
  const bool both_compact = first.profile().compact() && second.profile().compact();

  if (quad.rule == QuadratureRule::midpoint || !both_compact) {
    const DensityEstimate a(sorted, first, h);
    const DensityEstimate b(sorted, second, h);
    const double reach = std::max(a.reach(), b.reach());
    const std::size_t points = quad.points;
    return detail::midpoint_over(sorted.front() - reach, sorted.back() + reach, points,
                                 [&](const std::vector<double>& u) {
                                   auto fa = a.evaluate(u, method);
                                   const auto fb = b.evaluate(u, method);
                                   for (std::size_t k = 0; k < fa.size(); ++k)
                                     fa[k] = std::abs(fa[k] - fb[k]);
                                   return fa;
                                 });
  }

  const double inv_a = 1.0 / first.kappa();
  const double inv_b = 1.0 / second.kappa();
  std::vector<double> pieces;
  detail::sweep_compact(sorted, h, detail::use_direct(method), [&](const detail::Segment& seg) {
    const auto p = detail::profile_sum(first.kind(), seg);
    const auto q = detail::profile_sum(second.kind(), seg);
    const detail::Quadratic diff{p.c0 * inv_a - q.c0 * inv_b, p.c1 * inv_a - q.c1 * inv_b,
                                 p.c2 * inv_a - q.c2 * inv_b};
    pieces.push_back(detail::integrate_abs(diff, seg.length));
  });
  return pairwise_sum(pieces) / static_cast<double>(sorted.size());
}

inline double dkm_score(const Sample& sample, double h, const NormalizedKernel& first,
                        const NormalizedKernel& second, const QuadratureConfig& quad = {},
                        Evaluation method = Evaluation::automatic)
{
  const auto sorted = detail::sorted_copy(sample.values);
  return dkm_score(*sorted, h, first, second, quad, method);
}

enum class Selector
{
  lscv,
  mlscv1,
  mlscv2,
  dkm,
  baseline ///< oracle: needs the true density
};

inline std::string_view to_string(Selector s)
{
  switch (s) {
  case Selector::lscv: return "lscv";
  case Selector::mlscv1: return "mlscv1";
  case Selector::mlscv2: return "mlscv2";
  case Selector::dkm: return "dkm";
  case Selector::baseline: return "baseline";
  }
  return "unknown";
}

inline Selector parse_selector(std::string_view name)
{
  for (auto s : {Selector::lscv, Selector::mlscv1, Selector::mlscv2, Selector::dkm, Selector::baseline})
    if (name == to_string(s))
      return s;
  throw InvalidArgument("unknown selector: " + std::string(name));
}

struct SelectionResult
{
  Selector selector = Selector::lscv;
  double h_star = 0.0;
  std::size_t index = 0;
  std::vector<std::pair<double, double>> scores; // (h, score) in grid order
};

/// First index of the smallest non-NaN score, so ties go to the smallest h.
inline std::size_t argmin_score(std::span<const double> scores)
{
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (std::isnan(scores[k]))
      continue;
    if (!best || scores[k] < scores[*best])
      best = k;
  }
  if (!best)
    throw NumericalError("every score on the bandwidth grid is NaN");
  return *best;
}

inline SelectionResult make_selection(Selector selector, const BandwidthGrid& grid, std::span<const double> scores)
{
  detail::require(scores.size() == grid.size(), "score curve does not match the grid");
  SelectionResult r;
  r.selector = selector;
  r.index = argmin_score(scores);
  r.h_star = grid.values[r.index];
  r.scores.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    r.scores.emplace_back(grid.values[k], scores[k]);
  return r;
}

struct SelectorOptions
{
  QuadratureConfig quadrature{};
  Evaluation evaluation = Evaluation::automatic;
  KernelKind dkm_first = KernelKind::epanechnikov;
  KernelKind dkm_second = KernelKind::triangle;
};

/// Score curves of the data-driven selectors over the grid. One pass per
/// bandwidth serves all cross-validation criteria.
struct ScoreCurves
{
  std::vector<double> lscv, mlscv1, mlscv2, dkm;

  const std::vector<double>& of(Selector s) const
  {
    switch (s) {
    case Selector::lscv: return lscv;
    case Selector::mlscv1: return mlscv1;
    case Selector::mlscv2: return mlscv2;
    case Selector::dkm: return dkm;
    case Selector::baseline: break;
    }
    throw InvalidArgument("the baseline has no data-driven score curve");
  }
};

inline ScoreCurves score_curves(const Sample& sample, const BandwidthGrid& grid, const NormalizedKernel& kernel,
                                std::span<const Selector> selectors, const SelectorOptions& opts = {})
{
  const auto wants = [&](Selector s) { return std::find(selectors.begin(), selectors.end(), s) != selectors.end(); };
  const bool cv = wants(Selector::lscv) || wants(Selector::mlscv1) || wants(Selector::mlscv2);
  const bool dkm = wants(Selector::dkm);
  const auto sorted = detail::sorted_copy(sample.values);
  const NormalizedKernel dkm_a(opts.dkm_first), dkm_b(opts.dkm_second);

  ScoreCurves out;
  for (double h : grid.values) {
    if (cv) {
      const auto s = cross_validation_scores(sample, *sorted, kernel, h, opts.quadrature, opts.evaluation);
      out.lscv.push_back(s.lscv);
      out.mlscv1.push_back(s.mlscv1);
      out.mlscv2.push_back(s.mlscv2);
    }
    if (dkm)
      out.dkm.push_back(dkm_score(*sorted, h, dkm_a, dkm_b, opts.quadrature, opts.evaluation));
  }
  return out;
}

/// Data-driven selection: lscv, mlscv1, mlscv2 or dkm. The baseline needs
/// the true density and lives in select_oracle_bandwidth.
inline SelectionResult select_bandwidth(Selector selector, const Sample& sample, const BandwidthGrid& grid,
                                        const NormalizedKernel& kernel, const SelectorOptions& opts = {})
{
  detail::require(selector != Selector::baseline,
                  "the baseline is an oracle; use select_oracle_bandwidth with a simulated system");
  detail::require(!grid.values.empty(), "empty bandwidth grid");
  if (selector == Selector::mlscv1)
    detail::require(sample.size() >= 4, "MLSCV-1 needs at least four observations");
  if (selector == Selector::mlscv2)
    detail::require(sample.size() >= 6, "MLSCV-2 needs at least six observations");
  const Selector one[] = {selector};
  const auto curves = score_curves(sample, grid, kernel, one, opts);
  return make_selection(selector, grid, curves.of(selector));
}

/// AME(h) of the estimate at every grid bandwidth against known density values on `metric`.
inline std::vector<double> ame_curve(const Sample& sample, const BandwidthGrid& grid, const NormalizedKernel& kernel,
                                     const MetricGrid& metric, std::span<const double> true_values,
                                     Evaluation method = Evaluation::automatic)
{
  detail::require(true_values.size() == metric.size(), "true density values do not match the metric grid");
  const auto sorted = detail::sorted_copy(sample.values);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double h : grid.values) {
    const DensityEstimate est(*sorted, kernel, h);
    out.push_back(mean_abs_difference(est.evaluate(metric.points, method), true_values));
  }
  return out;
}

/// The oracle baseline: the grid bandwidth minimizing AME against the true invariant density.
inline SelectionResult select_oracle_bandwidth(const Sample& sample, const BandwidthGrid& grid,
                                               const NormalizedKernel& kernel, const MapSystem& system,
                                               const MetricGrid& metric = MetricGrid{},
                                               Evaluation method = Evaluation::automatic)
{
  const auto truth = density_values(system, metric);
  const auto curve = ame_curve(sample, grid, kernel, metric, truth, method);
  return make_selection(Selector::baseline, grid, curve);
}

} // namespace dynkde
