#pragma once

#include "dynkde/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dynkde {

enum class SystemKind
{
  logistic,
  gauss,
  beta
};

inline std::string_view to_string(SystemKind kind)
{
  switch (kind) {
  case SystemKind::logistic: return "logistic";
  case SystemKind::gauss: return "gauss";
  case SystemKind::beta: return "beta";
  }
  return "unknown";
}

inline SystemKind parse_system_kind(std::string_view name)
{
  if (name == "logistic") return SystemKind::logistic;
  if (name == "gauss") return SystemKind::gauss;
  if (name == "beta") return SystemKind::beta;
  throw InvalidArgument("unsupported system: " + std::string(name));
}

using Rng = std::mt19937_64;

/// Uniform variate on the open interval (0, 1) from the top 53 bits.
inline double uniform_open01(Rng& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

namespace detail {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble
{
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b)
{
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b)
{
  const double s = a + b;
  return {s, b - (s - a)};
}

// beta * y mod 1 carried in double-double; fractional parts within `snap`
// of an integer are treated as that integer.
inline DoubleDouble beta_step(double beta, DoubleDouble y, double snap)
{
  const double p = beta * y.hi;
  const double p_err = std::fma(beta, y.hi, -p);
  DoubleDouble prod = quick_two_sum(p, p_err + beta * y.lo);
  const double whole = std::floor(prod.hi);
  DoubleDouble frac = two_sum(prod.hi - whole, prod.lo);
  frac = quick_two_sum(frac.hi, frac.lo);
  if (frac.hi < 0.0) {
    frac = two_sum(frac.hi + 1.0, frac.lo);
  }
  const double value = frac.hi + frac.lo;
  if (value < snap || value > 1.0 - snap)
    return {0.0, 0.0};
  return frac;
}

/// Invariant density of the beta map as a step function:
/// f(x) = c * sum_i beta^-(i+1) 1[0, T^i(1)](x).
struct BetaSeries
{
  std::vector<double> breakpoints;   // ascending, distinct, in (0, 1]
  std::vector<double> suffix_weight; // density on (breakpoints[k-1], breakpoints[k]]
  std::size_t terms = 0;
  double normalization = 0.0;

  static BetaSeries build(double beta)
  {
    BetaSeries series;
    // truncate where the geometric tail beta^-(N+1) / (1 - 1/beta) < 1e-12
    std::size_t count = 1;
    while (std::pow(beta, -static_cast<double>(count + 1)) / (1.0 - 1.0 / beta) >= 1e-12)
      ++count;
    series.terms = count + 1;

    std::vector<std::pair<double, double>> atoms; // (T^i(1), beta^-(i+1))
    DoubleDouble orbit{1.0, 0.0};
    double weight = 1.0 / beta;
    double mass = 0.0;
    for (std::size_t i = 0; i < series.terms; ++i) {
      const double point = orbit.hi + orbit.lo;
      if (point > 0.0) {
        atoms.emplace_back(point, weight);
        mass += weight * point;
      }
      orbit = beta_step(beta, orbit, 1e-12);
      weight /= beta;
    }
    series.normalization = 1.0 / mass;

    std::sort(atoms.begin(), atoms.end());
    for (const auto& [point, w] : atoms) {
      if (!series.breakpoints.empty() && series.breakpoints.back() == point) {
        series.suffix_weight.back() += w;
      } else {
        series.breakpoints.push_back(point);
        series.suffix_weight.push_back(w);
      }
    }
    for (std::size_t k = series.suffix_weight.size(); k-- > 1;)
      series.suffix_weight[k - 1] += series.suffix_weight[k];
    for (double& w : series.suffix_weight)
      w *= series.normalization;
    return series;
  }

  double density(double x) const
  {
    const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
    if (it == breakpoints.end())
      return 0.0;
    return suffix_weight[static_cast<std::size_t>(it - breakpoints.begin())];
  }

  double cdf(double x) const
  {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < breakpoints.size() && prev < x; ++k) {
      const double right = std::min(x, breakpoints[k]);
      acc += (right - prev) * suffix_weight[k];
      prev = breakpoints[k];
    }
    return acc;
  }
};

} // namespace detail

/// One of the example interval maps on (0, 1) together with its invariant density.
class MapSystem
{
public:
  static MapSystem logistic(double lambda = 4.0)
  {
    detail::require(lambda >= 0.0 && lambda <= 4.0, "logistic parameter must lie in [0, 4]");
    return MapSystem(SystemKind::logistic, lambda);
  }

  static MapSystem gauss() { return MapSystem(SystemKind::gauss, 0.0); }

  static MapSystem beta(double beta = std::numbers::phi)
  {
    detail::require(beta > 1.0 && std::isfinite(beta), "beta map requires beta > 1");
    MapSystem system(SystemKind::beta, beta);
    system.series_ = std::make_shared<const detail::BetaSeries>(detail::BetaSeries::build(beta));
    return system;
  }

  static MapSystem make(SystemKind kind, double param = std::numbers::phi)
  {
    switch (kind) {
    case SystemKind::logistic: return logistic();
    case SystemKind::gauss: return gauss();
    case SystemKind::beta: return beta(param);
    }
    throw InvalidArgument("unsupported system");
  }

  SystemKind kind() const { return kind_; }
  double param() const { return param_; }
  std::string name() const { return std::string(to_string(kind_)); }

  /// T(x) for x in (0, 1); the image lies in [0, 1].
  double iterate(double x) const
  {
    if (!(x > 0.0 && x < 1.0))
      throw InvalidArgument("iterate: state must lie in (0, 1)");
    switch (kind_) {
    case SystemKind::logistic:
      return param_ * x * (1.0 - x);
    case SystemKind::gauss: {
      if (x < 1e-300)
        throw DegenerateOrbit("gauss map: state too close to 0");
      const double y = 1.0 / x;
      return y - std::floor(y);
    }
    case SystemKind::beta: {
      const double y = param_ * x;
      return y - std::floor(y);
    }
    }
    return 0.0;
  }

  double invariant_density(double x) const
  {
    if (!(x > 0.0 && x < 1.0))
      throw InvalidArgument("invariant_density: x must lie in (0, 1)");
    return density_or_zero(x);
  }

  /// The invariant density extended by zero outside (0, 1).
  double density_or_zero(double x) const
  {
    if (!(x > 0.0 && x < 1.0))
      return 0.0;
    switch (kind_) {
    case SystemKind::logistic:
      require_arcsine_law();
      return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x)));
    case SystemKind::gauss:
      return 1.0 / (std::numbers::ln2 * (1.0 + x));
    case SystemKind::beta:
      return series_->density(x);
    }
    return 0.0;
  }

  double invariant_cdf(double x) const
  {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    switch (kind_) {
    case SystemKind::logistic:
      require_arcsine_law();
      return 2.0 / std::numbers::pi * std::asin(std::sqrt(x));
    case SystemKind::gauss:
      return std::log1p(x) / std::numbers::ln2;
    case SystemKind::beta:
      return series_->cdf(x);
    }
    return 0.0;
  }

  bool has_inverse_cdf() const { return kind_ != SystemKind::beta; }

  /// F^-1(u) for u in [0, 1]; available for the logistic and gauss maps.
  double inverse_cdf(double u) const
  {
    detail::require(u >= 0.0 && u <= 1.0, "inverse_cdf: u must lie in [0, 1]");
    switch (kind_) {
    case SystemKind::logistic: {
      require_arcsine_law();
      const double s = std::sin(0.5 * std::numbers::pi * u);
      return s * s;
    }
    case SystemKind::gauss:
      return std::exp2(u) - 1.0;
    case SystemKind::beta:
      break;
    }
    throw InvalidArgument("inverse_cdf: no closed form for the beta map");
  }

  /// Points in (0, 1) where the invariant density jumps (beta map only).
  std::vector<double> density_jumps() const
  {
    if (kind_ != SystemKind::beta)
      return {};
    std::vector<double> jumps;
    for (double p : series_->breakpoints)
      if (p < 1.0)
        jumps.push_back(p);
    return jumps;
  }

  /// Number of series terms kept for the beta-map density (0 otherwise).
  std::size_t series_terms() const { return series_ ? series_->terms : 0; }

private:
  MapSystem(SystemKind kind, double param) : kind_(kind), param_(param) {}

  void require_arcsine_law() const
  {
    if (param_ != 4.0)
      throw InvalidArgument("logistic invariant density is only known for lambda = 4");
  }

  SystemKind kind_;
  double param_;
  std::shared_ptr<const detail::BetaSeries> series_;
};

inline constexpr int beta_burn_in_steps = 1000;

/// Draws an initial state distributed according to the invariant density.
///
/// Logistic and gauss use the inverse CDF; the beta map iterates a uniform
/// start through a burn-in of 1000 steps.
inline double sample_initial(const MapSystem& system, Rng& rng)
{
  const double u = uniform_open01(rng);
  if (system.has_inverse_cdf())
    return system.inverse_cdf(u);
  double x = u;
  for (int i = 0; i < beta_burn_in_steps; ++i) {
    x = system.iterate(x);
    if (!(x > 0.0 && x < 1.0))
      throw DegenerateOrbit("beta map: burn-in orbit collapsed");
  }
  return x;
}

struct TrajectoryConfig
{
  std::size_t n = 1000;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  std::optional<double> x0;
};

struct SampleMeta
{
  SystemKind system = SystemKind::logistic;
  double param = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double x0 = 0.0;
};

/// An ordered sequence of observations, optionally tagged with how it was generated.
struct Sample
{
  std::vector<double> values;
  std::optional<SampleMeta> meta;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

inline constexpr int max_orbit_retries = 100;

/// x_i = T^i(x0) + eps_i, i = 1..n, with eps_i ~ N(0, sigma^2) i.i.d.
///
/// When x0 is not given it is drawn from the invariant density; an orbit
/// that leaves (0, 1) or stalls on a fixed point triggers a fresh draw (at
/// most 100 retries). An explicit x0 that degenerates is an error.
inline Sample generate_trajectory(const MapSystem& system, const TrajectoryConfig& cfg, Rng& rng)
{
  detail::require(cfg.n >= 1, "trajectory length must be >= 1");
  detail::require(cfg.sigma >= 0.0 && std::isfinite(cfg.sigma), "noise sigma must be >= 0");
  if (cfg.x0)
    detail::require(*cfg.x0 > 0.0 && *cfg.x0 < 1.0, "x0 must lie in (0, 1)");

  std::vector<double> latent(cfg.n);
  double x0 = 0.0;
  bool ok = false;
  for (int attempt = 0; attempt <= max_orbit_retries && !ok; ++attempt) {
    try {
      x0 = cfg.x0 ? *cfg.x0 : sample_initial(system, rng);
    } catch (const DegenerateOrbit&) {
      continue;
    }
    ok = true;
    double x = x0;
    for (std::size_t i = 0; i < cfg.n; ++i) {
      double next = 0.0;
      try {
        next = system.iterate(x);
      } catch (const Error&) {
        ok = false;
        break;
      }
      const bool another_step = i + 1 < cfg.n;
      if (another_step && (!(next > 0.0 && next < 1.0) || std::abs(next - x) <= 1e-15)) {
        ok = false;
        break;
      }
      latent[i] = next;
      x = next;
    }
    if (!ok && cfg.x0)
      throw DegenerateOrbit("orbit from the given x0 is degenerate");
  }
  if (!ok)
    throw DegenerateOrbit("orbit degenerate after " + std::to_string(max_orbit_retries) +
                          " resamples of x0 (seed " + std::to_string(cfg.seed) + ")");

  if (cfg.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.sigma);
    for (double& v : latent)
      v += noise(rng);
  }
  return Sample{std::move(latent),
                SampleMeta{system.kind(), system.param(), cfg.sigma, cfg.seed, x0}};
}

/// Convenience overload: a fresh mt19937_64 stream seeded with cfg.seed.
inline Sample generate_trajectory(const MapSystem& system, const TrajectoryConfig& cfg)
{
  Rng rng(cfg.seed);
  return generate_trajectory(system, cfg, rng);
}

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent per-replication seed: master XOR hash(system, n, replication).
inline std::uint64_t derive_seed(std::uint64_t master, SystemKind system, std::uint64_t n,
                                 std::uint64_t replication)
{
  std::uint64_t h = mix64(static_cast<std::uint64_t>(system) + 1);
  h = mix64(h ^ n);
  h = mix64(h ^ replication);
  return master ^ h;
}

} // namespace dynkde
