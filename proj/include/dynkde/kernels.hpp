#pragma once

#include "dynkde/error.hpp"
#include "dynkde/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

namespace dynkde {

enum class KernelKind
{
  naive,
  triangle,
  epanechnikov,
  gaussian
};

inline std::string_view to_string(KernelKind kind)
{
  switch (kind) {
  case KernelKind::naive: return "naive";
  case KernelKind::triangle: return "triangle";
  case KernelKind::epanechnikov: return "epanechnikov";
  case KernelKind::gaussian: return "gaussian";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(std::string_view name)
{
  if (name == "naive") return KernelKind::naive;
  if (name == "triangle") return KernelKind::triangle;
  if (name == "epanechnikov" || name == "epan") return KernelKind::epanechnikov;
  if (name == "gaussian" || name == "gauss") return KernelKind::gaussian;
  throw InvalidArgument("unsupported kernel kind: " + std::string(name));
}

/// Radial profile r -> K(r) of a smoothing kernel, non-increasing on [0, inf).
///
/// The compact profiles are the indicator-type shapes 1, (1 - r), (1 - r^2)
/// on [0, 1]; the gaussian profile is exp(-r^2) with no normalization. The
/// naive profile takes the midpoint value 1/2 at its jump r = 1.
class KernelProfile
{
public:
  constexpr explicit KernelProfile(KernelKind kind) : kind_(kind) {}

  constexpr KernelKind kind() const { return kind_; }

  double operator()(double r) const
  {
    switch (kind_) {
    case KernelKind::naive:
      return r < 1.0 ? 1.0 : (r == 1.0 ? 0.5 : 0.0);
    case KernelKind::triangle:
      return r < 1.0 ? 1.0 - r : 0.0;
    case KernelKind::epanechnikov:
      return r < 1.0 ? 1.0 - r * r : 0.0;
    case KernelKind::gaussian:
      return std::exp(-r * r);
    }
    return 0.0;
  }

  constexpr bool compact() const { return kind_ != KernelKind::gaussian; }

  /// 1 for the compact profiles, +inf for the gaussian.
  constexpr double support_radius() const
  {
    return compact() ? 1.0 : std::numeric_limits<double>::infinity();
  }

  /// Radius beyond which evaluation treats the profile as zero.
  /// exp(-8.5^2) < 1e-31 for the gaussian.
  constexpr double effective_radius() const { return compact() ? 1.0 : 8.5; }

  /// Hölder exponent of the profile: 0 for the discontinuous naive kernel.
  constexpr double holder_exponent() const
  {
    return kind_ == KernelKind::naive ? 0.0 : 1.0;
  }

private:
  KernelKind kind_;
};

/// Volume of the Euclidean unit ball in R^d.
inline double unit_ball_volume(int d)
{
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

namespace detail {

// int_0^inf K(r)^power r^(d-1) dr in closed form
inline double radial_moment_closed(KernelKind kind, int d, int power)
{
  const double dd = d;
  if (power == 1) {
    switch (kind) {
    case KernelKind::naive: return 1.0 / dd;
    case KernelKind::triangle: return 1.0 / (dd * (dd + 1.0));
    case KernelKind::epanechnikov: return 2.0 / (dd * (dd + 2.0));
    case KernelKind::gaussian: return 0.5 * std::tgamma(0.5 * dd);
    }
  } else {
    switch (kind) {
    case KernelKind::naive: return 1.0 / dd;
    case KernelKind::triangle: return 2.0 / (dd * (dd + 1.0) * (dd + 2.0));
    case KernelKind::epanechnikov: return 8.0 / (dd * (dd + 2.0) * (dd + 4.0));
    case KernelKind::gaussian:
      return 0.5 * std::tgamma(0.5 * dd) * std::pow(2.0, -0.5 * dd);
    }
  }
  throw InvalidArgument("unsupported kernel kind");
}

} // namespace detail

/// int_0^inf K(r)^power r^(d-1) dr by adaptive Simpson (relative tolerance 1e-10).
inline double radial_moment_numeric(KernelProfile profile, int d, int power = 1)
{
  detail::require(d >= 1, "kernel dimension must be >= 1");
  const double upper = profile.compact() ? 1.0 : 40.0;
  auto integrand = [&](double r) {
    return std::pow(profile(r), power) * std::pow(r, d - 1);
  };
  return quad::adaptive_kronrod(integrand, 0.0, upper, 1e-12);
}

/// kappa = int_{R^d} K(||x||) dx = d * tau_d * int_0^inf K(r) r^(d-1) dr.
inline double normalization_constant(KernelKind kind, int d)
{
  detail::require(d >= 1, "kernel dimension must be >= 1");
  return d * unit_ball_volume(d) * detail::radial_moment_closed(kind, d, 1);
}

/// A kernel profile divided by its normalization constant in dimension d.
class NormalizedKernel
{
public:
  explicit NormalizedKernel(KernelKind kind, int d = 1)
    : profile_(kind), dim_(d), kappa_(normalization_constant(kind, d))
  {}

  KernelKind kind() const { return profile_.kind(); }
  const KernelProfile& profile() const { return profile_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }

  /// Normalized radial value K(r) / kappa.
  double operator()(double r) const { return profile_(r) / kappa_; }

  double at_origin() const { return profile_(0.0) / kappa_; }

private:
  KernelProfile profile_;
  int dim_;
  double kappa_;
};

/// K_h(x) = h^-d Kbar(||x|| / h) for a point x in R^d (Euclidean norm).
inline double kernel_h(const NormalizedKernel& kernel, double h, std::span<const double> x)
{
  detail::require(h > 0.0, "bandwidth must be positive");
  detail::require(static_cast<int>(x.size()) == kernel.dim(),
                  "point dimension does not match kernel dimension");
  double norm2 = 0.0;
  for (double xi : x)
    norm2 += xi * xi;
  return kernel(std::sqrt(norm2) / h) / std::pow(h, kernel.dim());
}

inline double kernel_h(const NormalizedKernel& kernel, double h, double x)
{
  return kernel_h(kernel, h, std::span<const double>(&x, 1));
}

/// R(Kbar) = int_{R^d} Kbar(||x||)^2 dx.
inline double kernel_l2_norm(const NormalizedKernel& kernel)
{
  const int d = kernel.dim();
  const double raw = d * unit_ball_volume(d) * detail::radial_moment_closed(kernel.kind(), d, 2);
  return raw / (kernel.kappa() * kernel.kappa());
}

} // namespace dynkde
