#pragma once

#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/gauss_transform.hpp"
#include "dynkde/kernels.hpp"
#include "dynkde/quadrature.hpp"
#include "dynkde/summation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace dynkde {

namespace detail {

inline std::shared_ptr<const std::vector<double>> sorted_copy(std::span<const double> values)
{
  auto copy = std::make_shared<std::vector<double>>(values.begin(), values.end());
  std::sort(copy->begin(), copy->end());
  return copy;
}

inline void require_finite(std::span<const double> values)
{
  for (double v : values)
    require(std::isfinite(v), "sample contains a non-finite value");
}

/// sum_j Kbar(|y - x_j| / h) for every target y (no 1/(n h) factor).
inline std::vector<double> kernel_sums(std::span<const double> sorted, const NormalizedKernel& kernel,
                                       double h, std::span<const double> targets, Evaluation method)
{
  if (kernel.kind() == KernelKind::gaussian) {
    auto sums = gauss_transform(sorted, targets, h, method);
    const double inv_kappa = 1.0 / kernel.kappa();
    for (double& s : sums)
      s *= inv_kappa;
    return sums;
  }
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double y = targets[t];
    std::size_t first = 0, last = sorted.size();
    if (method != Evaluation::direct) {
      first = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), y - h) - sorted.begin());
      last = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), y + h) - sorted.begin());
    }
    out[t] = pairwise_sum_of(first, last, [&](std::size_t j) {
      return kernel(std::abs(y - sorted[j]) / h);
    });
  }
  return out;
}

} // namespace detail

/// The kernel density estimate f_{D,h}(x) = (1 / (n h)) sum_i Kbar(|x - x_i| / h) on the real line.
///
/// Holds a sorted copy of the observations, so it stays valid independently
/// of the Sample it was built from.
class DensityEstimate
{
public:
  DensityEstimate(std::span<const double> observations, NormalizedKernel kernel, double h)
    : kernel_(kernel), h_(h)
  {
    detail::require(!observations.empty(), "density estimate needs a nonempty sample");
    detail::require(h > 0.0 && std::isfinite(h), "bandwidth must be positive");
    detail::require(kernel.dim() == 1, "DensityEstimate is one-dimensional");
    detail::require_finite(observations);
    sorted_ = detail::sorted_copy(observations);
  }

  DensityEstimate(const Sample& sample, NormalizedKernel kernel, double h)
    : DensityEstimate(std::span<const double>(sample.values), kernel, h)
  {}

  const NormalizedKernel& kernel() const { return kernel_; }
  double bandwidth() const { return h_; }
  std::size_t size() const { return sorted_->size(); }
  std::span<const double> sorted_sample() const { return *sorted_; }

  /// Half-width of the region around each observation where the estimate is nonzero.
  double reach() const { return h_ * kernel_.profile().effective_radius(); }

  std::vector<double> evaluate(std::span<const double> queries,
                               Evaluation method = Evaluation::automatic) const
  {
    auto sums = detail::kernel_sums(*sorted_, kernel_, h_, queries, method);
    const double scale = 1.0 / (static_cast<double>(sorted_->size()) * h_);
    for (double& s : sums)
      s *= scale;
    return sums;
  }

  double operator()(double x) const
  {
    return evaluate(std::span<const double>(&x, 1), Evaluation::windowed).front();
  }

private:
  NormalizedKernel kernel_;
  double h_;
  std::shared_ptr<const std::vector<double>> sorted_;
};

inline std::vector<double> kde_evaluate(const DensityEstimate& est, std::span<const double> queries,
                                        Evaluation method = Evaluation::automatic)
{
  return est.evaluate(queries, method);
}

/// Direct-summation estimate in R^d. `points` and `queries` are row-major
/// arrays of d-dimensional points.
inline std::vector<double> kde_evaluate_points(std::span<const double> points, std::span<const double> queries,
                                               const NormalizedKernel& kernel, double h)
{
  const auto d = static_cast<std::size_t>(kernel.dim());
  detail::require(h > 0.0, "bandwidth must be positive");
  detail::require(!points.empty() && points.size() % d == 0, "points must hold a whole number of d-vectors");
  detail::require(queries.size() % d == 0, "queries must hold a whole number of d-vectors");
  const std::size_t n = points.size() / d;
  const double scale = 1.0 / (static_cast<double>(n) * std::pow(h, static_cast<double>(d)));
  std::vector<double> out(queries.size() / d);
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double* y = &queries[q * d];
    out[q] = scale * pairwise_sum_of(0, n, [&](std::size_t j) {
      double norm2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = y[k] - points[j * d + k];
        norm2 += diff * diff;
      }
      return kernel(std::sqrt(norm2) / h);
    });
  }
  return out;
}

/// Leave-one-out estimate at its own point:
/// (1 / (n - 1)) sum_{j != i} K_h(x_i - x_j). The index is zero-based.
inline double loo_evaluate(const Sample& sample, const NormalizedKernel& kernel, double h, std::size_t i)
{
  const std::size_t n = sample.size();
  detail::require(n >= 2, "leave-one-out needs at least two observations");
  detail::require(i < n, "leave-one-out index out of range");
  detail::require(h > 0.0, "bandwidth must be positive");
  const auto& x = sample.values;
  const double sum = pairwise_sum_of(0, n, [&](std::size_t j) {
    return j == i ? 0.0 : kernel(std::abs(x[i] - x[j]) / h);
  });
  return sum / (static_cast<double>(n - 1) * h);
}

/// Number of indices j with |j - i| > window among 0..n-1.
inline std::size_t mloo_count(std::size_t n, std::size_t i, std::size_t window)
{
  const std::size_t lo = i > window ? i - window : 0;
  const std::size_t hi = std::min(n - 1, i + window);
  return n - (hi - lo + 1);
}

/// Leave-out estimate excluding temporal neighbours:
/// (1 / #{j : |j - i| > l}) sum_{|j - i| > l} K_h(x_i - x_j). Zero-based index.
inline double mloo_evaluate(const Sample& sample, const NormalizedKernel& kernel, double h, std::size_t i,
                            std::size_t window)
{
  const std::size_t n = sample.size();
  detail::require(n >= 2, "leave-out estimate needs at least two observations");
  detail::require(i < n, "leave-out index out of range");
  detail::require(h > 0.0, "bandwidth must be positive");
  const std::size_t count = mloo_count(n, i, window);
  if (count == 0)
    throw InvalidArgument("no observation lies outside the exclusion window; sample too small");
  const auto& x = sample.values;
  const double sum = pairwise_sum_of(0, n, [&](std::size_t j) {
    const std::size_t gap = j > i ? j - i : i - j;
    return gap > window ? kernel(std::abs(x[i] - x[j]) / h) : 0.0;
  });
  return sum / (static_cast<double>(count) * h);
}

/// f_{P,h}(x) = int K_h(x - x') f(x') dx' for the invariant density of `system`.
///
/// For the logistic and gauss maps the integral is taken over u = F(x') so
/// that the endpoint singularity of the arcsine law disappears; the beta map
/// is integrated in x' with its density jumps as breakpoints. Every kink of
/// the kernel is a breakpoint as well.
inline double smoothed_density(const MapSystem& system, const NormalizedKernel& kernel, double h, double x,
                               double rel_tol = 1e-8)
{
  detail::require(h > 0.0 && std::isfinite(h), "bandwidth must be positive");
  detail::require(kernel.dim() == 1, "smoothed_density is one-dimensional");
  const double reach = h * kernel.profile().effective_radius();
  const double lo = std::max(0.0, x - reach);
  const double hi = std::min(1.0, x + reach);
  if (lo >= hi)
    return 0.0;

  std::vector<double> cuts{lo, hi};
  for (double c : {x - h, x, x + h})
    if (c > lo && c < hi)
      cuts.push_back(c);

  auto kh = [&](double xp) { return kernel(std::abs(x - xp) / h) / h; };
  double total = 0.0;
  if (system.has_inverse_cdf()) {
    for (double& c : cuts)
      c = system.invariant_cdf(c);
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&](double u) { return kh(system.inverse_cdf(std::clamp(u, 0.0, 1.0))); };
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      total += quad::adaptive_kronrod(integrand, cuts[k], cuts[k + 1], rel_tol, 1e-15);
  } else {
    for (double j : system.density_jumps())
      if (j > lo && j < hi)
        cuts.push_back(j);
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&](double xp) { return kh(xp) * system.density_or_zero(xp); };
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      total += quad::adaptive_kronrod(integrand, cuts[k], cuts[k + 1], rel_tol, 1e-15);
  }
  return total;
}

} // namespace dynkde
