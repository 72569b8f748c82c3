#pragma once

#include "dynkde/error.hpp"
#include "dynkde/summation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace dynkde::quad {

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth,
                       bool& converged)
{
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  if (depth <= 0) {
    converged = false;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

} // namespace detail

/// Adaptive Simpson with interval bisection.
///
/// The target tolerance is `rel_tol * |I|` where |I| is estimated from a
/// coarse composite pass, floored at `abs_tol`. Throws NumericalError when
/// the recursion depth is exhausted before the tolerance is met.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double rel_tol = 1e-10,
                        double abs_tol = 1e-300, int max_depth = 48)
{
  if (a == b)
    return 0.0;
  // seed with a composite pass so that narrow features are not missed
  constexpr int pieces = 16;
  const double step = (b - a) / pieces;
  std::array<double, 2 * pieces + 1> fx{};
  for (int i = 0; i <= 2 * pieces; ++i)
    fx[i] = f(a + 0.5 * step * i);
  double coarse = 0.0;
  for (int i = 0; i < pieces; ++i)
    coarse += step / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
  const double tol = std::max(rel_tol * std::abs(coarse), abs_tol) / pieces;

  bool converged = true;
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + step * i;
    const double hi = (i == pieces - 1) ? b : lo + step;
    const double whole = (hi - lo) / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
    total += detail::simpson_recurse(f, lo, hi, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2],
                                     whole, tol, max_depth, converged);
  }
  if (!converged)
    throw NumericalError("adaptive Simpson quadrature did not converge");
  return total;
}

struct KronrodEstimate
{
  double value;
  double error;
};

/// 7-point Gauss / 15-point Kronrod pair on [a, b].
template <class F>
KronrodEstimate gauss_kronrod15(const F& f, double a, double b)
{
  static constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = wk[7] * fc;
  double gauss = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += wk[j] * sum;
    if (j % 2 == 1)
      gauss += wg[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

/// Globally adaptive Gauss-Kronrod integration: the interval with the largest
/// error estimate is bisected until the summed error meets the tolerance.
template <class F>
double adaptive_kronrod(const F& f, double a, double b, double rel_tol = 1e-10,
                        double abs_tol = 1e-14, std::size_t max_intervals = 4000)
{
  if (a == b)
    return 0.0;
  struct Piece
  {
    double lo, hi, value, error;
    bool operator<(const Piece& other) const { return error < other.error; }
  };
  std::priority_queue<Piece> pieces;
  auto first = gauss_kronrod15(f, a, b);
  pieces.push({a, b, first.value, first.error});
  double value = first.value;
  double error = first.error;
  while (error > std::max(rel_tol * std::abs(value), abs_tol)) {
    if (pieces.size() >= max_intervals)
      throw NumericalError("adaptive Gauss-Kronrod quadrature did not converge");
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const auto left = gauss_kronrod15(f, worst.lo, mid);
    const auto right = gauss_kronrod15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pieces.push({worst.lo, mid, left.value, left.error});
    pieces.push({mid, worst.hi, right.value, right.error});
  }
  // re-add the pieces so that the running-update rounding does not leak into the result
  std::vector<double> parts;
  parts.reserve(pieces.size());
  while (!pieces.empty()) {
    parts.push_back(pieces.top().value);
    pieces.pop();
  }
  return pairwise_sum(parts);
}

/// Composite midpoint rule with `points` nodes (a + (i + 1/2)(b - a)/points).
template <class F>
double midpoint(const F& f, double a, double b, std::size_t points)
{
  const double step = (b - a) / static_cast<double>(points);
  return step * pairwise_sum_of(0, points, [&](std::size_t i) {
           return f(a + (static_cast<double>(i) + 0.5) * step);
         });
}

} // namespace dynkde::quad
