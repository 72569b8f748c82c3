#pragma once

#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/summation.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace dynkde {

/// Midpoint grid u_i = (i - 1/2) / m inside (0, 1).
struct MetricGrid
{
  std::vector<double> points;

  explicit MetricGrid(std::size_t m = 10000)
  {
    detail::require(m >= 1, "metric grid needs at least one point");
    points.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      points[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
  }

  std::size_t size() const { return points.size(); }
};

/// Mean of |a_i - b_i|.
inline double mean_abs_difference(std::span<const double> a, std::span<const double> b)
{
  detail::require(a.size() == b.size() && !a.empty(), "value vectors must have equal nonzero length");
  return pairwise_sum_of(0, a.size(), [&](std::size_t i) { return std::abs(a[i] - b[i]); }) /
         static_cast<double>(a.size());
}

inline std::vector<double> density_values(const MapSystem& system, const MetricGrid& grid)
{
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = system.invariant_density(grid.points[i]);
  return f;
}

} // namespace dynkde
