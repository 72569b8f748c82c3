#pragma once

// Exact integrals of one-dimensional compact-kernel estimates.
//
// With a support radius of 1, f_{D,h} is a piecewise polynomial whose
// breakpoints are x_i - h, x_i and x_i + h. Between two consecutive
// breakpoints the active points split into those left of x and those right
// of x, and their first two moments determine the polynomial for every
// compact profile. The sweep keeps those moments relative to the current
// segment start, in units of h, and resynchronizes them from the active
// index ranges every few segments.

#include "dynkde/error.hpp"
#include "dynkde/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

namespace dynkde::detail {

struct SideMoments
{
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;

  void add(double e)
  {
    s0 += 1.0;
    s1 += e;
    s2 += e * e;
  }
  void remove(double e)
  {
    s0 -= 1.0;
    s1 -= e;
    s2 -= e * e;
  }
  void shift(double by)
  {
    s2 += by * (2.0 * s1 + by * s0);
    s1 += by * s0;
  }
};

/// Segment [start, start + length * h] with the moments of e_i = (start - x_i) / h.
struct Segment
{
  double start;
  double length; // in units of h
  SideMoments left;  // active points with x_i <= x
  SideMoments right; // active points with x_i > x
};

/// c0 + c1 tau + c2 tau^2 = sum of the raw profile over the active points,
/// with tau = (x - start) / h.
struct Quadratic
{
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;

  double operator()(double tau) const { return c0 + tau * (c1 + tau * c2); }
};

inline Quadratic profile_sum(KernelKind kind, const Segment& seg)
{
  const auto& l = seg.left;
  const auto& r = seg.right;
  const double s0 = l.s0 + r.s0;
  switch (kind) {
  case KernelKind::naive:
    return {s0, 0.0, 0.0};
  case KernelKind::triangle:
    // left: 1 - (tau + e), right: 1 + (tau + e)
    return {s0 - l.s1 + r.s1, r.s0 - l.s0, 0.0};
  case KernelKind::epanechnikov:
    return {s0 - (l.s2 + r.s2), -2.0 * (l.s1 + r.s1), -s0};
  case KernelKind::gaussian:
    break;
  }
  throw InvalidArgument("profile_sum: compact kernel required");
}

/// int_0^len q(tau)^2 d tau, exact for quadratics (3-point Gauss-Legendre).
inline double integrate_square(const Quadratic& q, double len)
{
  static constexpr double node = 0.774596669241483377035853079956480;
  const double mid = 0.5 * len;
  const double a = q(mid - mid * node);
  const double b = q(mid);
  const double c = q(mid + mid * node);
  return mid * (5.0 / 9.0 * (a * a + c * c) + 8.0 / 9.0 * b * b);
}

inline double antiderivative(const Quadratic& q, double tau)
{
  return tau * (q.c0 + tau * (0.5 * q.c1 + tau * q.c2 / 3.0));
}

/// int_0^len |q(tau)| d tau, exact: the interval is split at the real roots.
inline double integrate_abs(const Quadratic& q, double len)
{
  std::array<double, 4> cuts{0.0, len, len, len};
  int count = 1;
  auto push_root = [&](double t) {
    if (t > 0.0 && t < len)
      cuts[static_cast<std::size_t>(count++)] = t;
  };
  if (q.c2 != 0.0) {
    const double disc = q.c1 * q.c1 - 4.0 * q.c2 * q.c0;
    if (disc > 0.0) {
      const double w = -0.5 * (q.c1 + std::copysign(std::sqrt(disc), q.c1));
      if (w != 0.0) {
        push_root(q.c0 / w);
        push_root(w / q.c2);
      }
    }
  } else if (q.c1 != 0.0) {
    push_root(-q.c0 / q.c1);
  }
  std::sort(cuts.begin() + 1, cuts.begin() + count);
  cuts[static_cast<std::size_t>(count)] = len;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto a = cuts[static_cast<std::size_t>(i)];
    const auto b = cuts[static_cast<std::size_t>(i + 1)];
    total += std::abs(antiderivative(q, b) - antiderivative(q, a));
  }
  return total;
}

/// Calls visit(Segment) for every segment on which the estimate is nonzero.
///
/// `sorted` must be ascending. With `direct` set, the moments of every
/// segment are recomputed from all n points (O(n^2) reference route).
template <class Visitor>
void sweep_compact(std::span<const double> sorted, double h, bool direct, Visitor&& visit)
{
  const std::size_t n = sorted.size();
  if (n == 0)
    return;
  constexpr std::size_t resync_every = 64;

  // events are processed in the order enter (x - h), cross (x), leave (x + h)
  std::size_t next_enter = 0, next_cross = 0, next_leave = 0;
  SideMoments left, right;
  double start = sorted.front() - h;
  std::size_t segments = 0;

  auto moments_from_ranges = [&](double at) {
    left = {};
    right = {};
    if (direct) {
      for (std::size_t i = 0; i < n; ++i) {
        const double y = sorted[i];
        const double e = (at - y) / h;
        // classification by event order, not by the rounded value of e
        const bool entered = y - h <= at;
        const bool crossed = y <= at;
        const bool left_ = y + h <= at;
        if (crossed && !left_)
          left.add(e);
        else if (entered && !crossed)
          right.add(e);
      }
      return;
    }
    for (std::size_t i = next_leave; i < next_cross; ++i)
      left.add((at - sorted[i]) / h);
    for (std::size_t i = next_cross; i < next_enter; ++i)
      right.add((at - sorted[i]) / h);
  };

  while (next_leave < n) {
    const double enter_pos = next_enter < n ? sorted[next_enter] - h : INFINITY;
    const double cross_pos = next_cross < n ? sorted[next_cross] : INFINITY;
    const double leave_pos = sorted[next_leave] + h;
    const double pos = std::min({enter_pos, cross_pos, leave_pos});

    if (pos > start && (next_enter > next_leave)) {
      if (direct || segments % resync_every == 0)
        moments_from_ranges(start);
      const double len = (pos - start) / h;
      visit(Segment{start, len, left, right});
      ++segments;
      left.shift(len);
      right.shift(len);
    }
    start = pos;

    while (next_enter < n && sorted[next_enter] - h == pos) {
      right.add((pos - sorted[next_enter]) / h);
      ++next_enter;
    }
    while (next_cross < n && sorted[next_cross] == pos) {
      right.remove((pos - sorted[next_cross]) / h);
      left.add(0.0);
      ++next_cross;
    }
    while (next_leave < n && sorted[next_leave] + h == pos) {
      left.remove((pos - sorted[next_leave]) / h);
      ++next_leave;
    }
  }
}

} // namespace dynkde::detail
