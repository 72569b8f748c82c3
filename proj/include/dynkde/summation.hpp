#pragma once

#include <cstddef>
#include <span>

namespace dynkde {

namespace detail {
inline constexpr std::size_t pairwise_block = 32;
}

/// Pairwise (tree) summation of `term(i)` for i in [first, last).
///
/// The split points depend only on the index range, so the result is
/// reproducible regardless of how callers partition their work.
template <class Term>
double pairwise_sum_of(std::size_t first, std::size_t last, Term&& term)
{
  const std::size_t count = last - first;
  if (count <= detail::pairwise_block) {
    double acc = 0.0;
    for (std::size_t i = first; i < last; ++i)
      acc += term(i);
    return acc;
  }
  const std::size_t mid = first + count / 2;
  return pairwise_sum_of(first, mid, term) + pairwise_sum_of(mid, last, term);
}

inline double pairwise_sum(std::span<const double> values)
{
  return pairwise_sum_of(0, values.size(),
                         [&](std::size_t i) { return values[i]; });
}

} // namespace dynkde
