#pragma once

// One-dimensional Gauss transform
//
//   G(y) = sum_j exp(-((y - x_j) / s)^2)
//
// evaluated at many targets y, by windowed direct summation on sorted sources
// or by a fast Gauss transform (Hermite expansions per source box translated
// into Taylor expansions per target box). Boxes have width s/2, so both
// expansions converge with ratio 1/4; with 24 terms the truncation error is
// below 1e-15 of the box weight.

#include "dynkde/error.hpp"
#include "dynkde/summation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace dynkde {

/// How kernel sums are evaluated.
enum class Evaluation
{
  automatic, ///< cheapest exact route (windowed or fast transform)
  windowed,  ///< sorted window search, contributions beyond the cutoff dropped
  direct,    ///< every source visited, no window
  fgt        ///< fast Gauss transform (gaussian kernel only)
};

namespace detail {

inline constexpr double gauss_cutoff = 8.5;
inline constexpr int fgt_order = 24;
inline constexpr int fgt_reach = 18; // |target box - source box| <= reach covers the cutoff

struct HermiteTable
{
  // h_n(delta) = exp(-delta^2) H_n(delta), delta = offset / 2
  std::array<std::array<double, 2 * fgt_order - 1>, 2 * fgt_reach + 1> values{};
};

inline const HermiteTable& hermite_table()
{
  static const HermiteTable table = [] {
    HermiteTable t;
    for (int offset = -fgt_reach; offset <= fgt_reach; ++offset) {
      const double delta = 0.5 * offset;
      auto& row = t.values[static_cast<std::size_t>(offset + fgt_reach)];
      row[0] = std::exp(-delta * delta);
      row[1] = 2.0 * delta * row[0];
      for (int n = 1; n + 1 < 2 * fgt_order - 1; ++n)
        row[n + 1] = 2.0 * delta * row[n] - 2.0 * n * row[n - 1];
    }
    return t;
  }();
  return table;
}

inline std::vector<double> gauss_windowed(std::span<const double> sources,
                                          std::span<const double> targets, double scale)
{
  const double inv = 1.0 / scale;
  const double reach = gauss_cutoff * scale;
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double y = targets[t];
    const auto lo = std::lower_bound(sources.begin(), sources.end(), y - reach);
    const auto hi = std::upper_bound(lo, sources.end(), y + reach);
    const std::size_t first = static_cast<std::size_t>(lo - sources.begin());
    const std::size_t last = static_cast<std::size_t>(hi - sources.begin());
    out[t] = pairwise_sum_of(first, last, [&](std::size_t j) {
      const double u = (y - sources[j]) * inv;
      return std::exp(-u * u);
    });
  }
  return out;
}

inline std::vector<double> gauss_direct(std::span<const double> sources,
                                        std::span<const double> targets, double scale)
{
  const double inv = 1.0 / scale;
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double y = targets[t];
    out[t] = pairwise_sum_of(0, sources.size(), [&](std::size_t j) {
      const double u = (y - sources[j]) * inv;
      return std::exp(-u * u);
    });
  }
  return out;
}

inline std::vector<double> gauss_fast(std::span<const double> sources,
                                      std::span<const double> targets, double scale)
{
  constexpr int p = fgt_order;
  std::vector<double> out(targets.size(), 0.0);
  if (sources.empty() || targets.empty())
    return out;

  const double width = 0.5 * scale;
  const double inv_scale = 1.0 / scale;
  const double origin = std::min(sources.front(), *std::min_element(targets.begin(), targets.end()));
  auto box_of = [&](double v) { return static_cast<std::int64_t>(std::floor((v - origin) / width)); };
  auto center_of = [&](std::int64_t b) { return origin + (static_cast<double>(b) + 0.5) * width; };

  // Hermite moments A_k = sum_j t_j^k / k! for every occupied source box
  std::vector<std::int64_t> src_boxes;
  std::vector<double> moments;
  for (std::size_t j = 0; j < sources.size();) {
    const std::int64_t b = box_of(sources[j]);
    const double c = center_of(b);
    std::array<double, p> a{};
    for (; j < sources.size() && box_of(sources[j]) == b; ++j) {
      const double t = (sources[j] - c) * inv_scale;
      double term = 1.0;
      for (int k = 0; k < p; ++k) {
        a[k] += term;
        term *= t / (k + 1);
      }
    }
    src_boxes.push_back(b);
    moments.insert(moments.end(), a.begin(), a.end());
  }

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });

  static constexpr auto inv_factorial = [] {
    std::array<double, p> f{};
    double v = 1.0;
    for (int l = 0; l < p; ++l) {
      f[l] = ((l % 2) ? -1.0 : 1.0) / v;
      v *= (l + 1);
    }
    return f;
  }();
  const auto& table = hermite_table();

  for (std::size_t i = 0; i < order.size();) {
    const std::int64_t tb = box_of(targets[order[i]]);
    const double c = center_of(tb);
    std::array<double, p> taylor{};
    const auto first = std::lower_bound(src_boxes.begin(), src_boxes.end(), tb - fgt_reach);
    const auto last = std::upper_bound(first, src_boxes.end(), tb + fgt_reach);
    for (auto it = first; it != last; ++it) {
      const auto idx = static_cast<std::size_t>(it - src_boxes.begin());
      const double* a = &moments[idx * p];
      const auto& h = table.values[static_cast<std::size_t>(tb - *it + fgt_reach)];
      for (int l = 0; l < p; ++l) {
        double acc = 0.0;
        for (int k = 0; k < p; ++k)
          acc += a[k] * h[k + l];
        taylor[l] += acc;
      }
    }
    for (int l = 0; l < p; ++l)
      taylor[l] *= inv_factorial[l];
    for (; i < order.size() && box_of(targets[order[i]]) == tb; ++i) {
      const double tau = (targets[order[i]] - c) * inv_scale;
      double acc = taylor[p - 1];
      for (int l = p - 2; l >= 0; --l)
        acc = acc * tau + taylor[l];
      out[order[i]] = acc;
    }
  }
  return out;
}

// Rough operation counts used to pick the cheaper exact route.
inline bool prefer_fast_transform(std::span<const double> sources,
                                  std::span<const double> targets, double scale)
{
  if (sources.empty() || targets.empty())
    return false;
  const double reach = gauss_cutoff * scale;
  double pairs = 0.0;
  for (double y : targets) {
    const auto lo = std::lower_bound(sources.begin(), sources.end(), y - reach);
    const auto hi = std::upper_bound(lo, sources.end(), y + reach);
    pairs += static_cast<double>(hi - lo);
  }
  const auto [tmin, tmax] = std::minmax_element(targets.begin(), targets.end());
  const double span_boxes = (std::max(*tmax, sources.back()) - std::min(*tmin, sources.front())) /
                            (0.5 * scale) + 1.0;
  const double target_boxes = std::min(static_cast<double>(targets.size()), span_boxes);
  const double neighbours = std::min(2.0 * fgt_reach + 1.0, span_boxes);
  const double fast_cost = target_boxes * neighbours * fgt_order * fgt_order +
                           2.0 * fgt_order * static_cast<double>(sources.size() + targets.size());
  const double direct_cost = 12.0 * pairs;
  return fast_cost < direct_cost;
}

} // namespace detail

/// G(y_t) = sum_j exp(-((y_t - x_j)/scale)^2) for every target.
///
/// `sorted_sources` must be ascending. The windowed and fast routes drop
/// pairs farther apart than 8.5 * scale (each below 1e-31).
inline std::vector<double> gauss_transform(std::span<const double> sorted_sources,
                                           std::span<const double> targets, double scale,
                                           Evaluation method = Evaluation::automatic)
{
  detail::require(scale > 0.0 && std::isfinite(scale), "gauss_transform: scale must be positive");
  switch (method) {
  case Evaluation::direct:
    return detail::gauss_direct(sorted_sources, targets, scale);
  case Evaluation::windowed:
    return detail::gauss_windowed(sorted_sources, targets, scale);
  case Evaluation::fgt:
    return detail::gauss_fast(sorted_sources, targets, scale);
  case Evaluation::automatic:
    break;
  }
  if (detail::prefer_fast_transform(sorted_sources, targets, scale))
    return detail::gauss_fast(sorted_sources, targets, scale);
  return detail::gauss_windowed(sorted_sources, targets, scale);
}

} // namespace dynkde
