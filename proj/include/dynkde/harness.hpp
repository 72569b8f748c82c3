#pragma once

#include "dynkde/bandwidth.hpp"
#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/estimator.hpp"
#include "dynkde/io.hpp"
#include "dynkde/kernels.hpp"
#include "dynkde/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace dynkde {

inline const std::vector<Selector>& all_selectors()
{
  static const std::vector<Selector> s{Selector::lscv, Selector::mlscv1, Selector::mlscv2, Selector::dkm,
                                       Selector::baseline};
  return s;
}

struct ExperimentConfig
{
  std::vector<SystemKind> systems{SystemKind::logistic, SystemKind::gauss};
  std::vector<std::size_t> sample_sizes{500, 1000, 5000, 10000};
  std::size_t replications = 20;
  double sigma = 0.01;
  std::vector<Selector> selectors = all_selectors();
  std::uint64_t master_seed = 1;
  std::size_t ame_m = 10000;
  std::size_t grid_count = 100;
  KernelKind kernel = KernelKind::gaussian;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const
  {
    detail::require(!systems.empty(), "experiment needs at least one system");
    for (auto s : systems)
      detail::require(s == SystemKind::logistic || s == SystemKind::gauss,
                      "experiments cover the logistic and gauss maps only");
    detail::require(!sample_sizes.empty(), "experiment needs at least one sample size");
    for (auto n : sample_sizes)
      detail::require(n >= 4, "sample sizes must be >= 4");
    detail::require(replications >= 1, "replications must be >= 1");
    detail::require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be >= 0");
    detail::require(!selectors.empty(), "experiment needs at least one selector");
    for (auto s : selectors)
      if (s == Selector::mlscv2)
        for (auto n : sample_sizes)
          detail::require(n >= 6, "MLSCV-2 needs sample sizes >= 6");
    detail::require(ame_m >= 1, "ame_m must be >= 1");
    detail::require(grid_count >= 2, "grid_count must be >= 2");
    detail::require(kernel == KernelKind::gaussian, "the experiment estimator kernel is gaussian");
  }
};

/// One (system, n, selector) cell.
struct ReportRow
{
  SystemKind system = SystemKind::logistic;
  std::size_t n = 0;
  Selector selector = Selector::lscv;
  double mean_ame = 0.0;
  double std_ame = 0.0;
  std::vector<double> ames;    // per replication
  std::vector<double> h_stars; // per replication

  bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport
{
  ExperimentConfig config;
  std::vector<ReportRow> rows;

  bool operator==(const ExperimentReport&) const = default;

  const ReportRow* find(SystemKind system, std::size_t n, Selector selector) const
  {
    for (const auto& r : rows)
      if (r.system == system && r.n == n && r.selector == selector)
        return &r;
    return nullptr;
  }
};

/// Outcome of one replication: the selected bandwidth and its AME per selector.
struct ReplicationOutcome
{
  std::uint64_t seed = 0;
  std::vector<double> h_star; // indexed like ExperimentConfig::selectors
  std::vector<double> ame;
};

namespace detail {

inline double mean_of(const std::vector<double>& v)
{
  return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v)
{
  if (v.size() < 2)
    return 0.0;
  const double m = mean_of(v);
  const double ss = pairwise_sum_of(0, v.size(), [&](std::size_t i) { return (v[i] - m) * (v[i] - m); });
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace detail

/// Runs every selector of `cfg` on one trajectory and one shared grid.
inline ReplicationOutcome run_replication(const ExperimentConfig& cfg, const MapSystem& system, std::size_t n,
                                          std::size_t replication, const MetricGrid& metric,
                                          std::span<const double> truth)
{
  ReplicationOutcome out;
  out.seed = derive_seed(cfg.master_seed, system.kind(), n, replication);
  TrajectoryConfig tcfg;
  tcfg.n = n;
  tcfg.sigma = cfg.sigma;
  tcfg.seed = out.seed;
  const Sample sample = generate_trajectory(system, tcfg);

  const NormalizedKernel kernel(cfg.kernel);
  const auto grid = bandwidth_grid(sample, kernel, cfg.grid_count);
  const auto ame = ame_curve(sample, grid, kernel, metric, truth);
  const auto curves = score_curves(sample, grid, kernel, cfg.selectors);

  for (Selector s : cfg.selectors) {
    const std::size_t k = s == Selector::baseline ? argmin_score(ame) : argmin_score(curves.of(s));
    out.h_star.push_back(grid.values[k]);
    out.ame.push_back(ame[k]);
  }
  return out;
}

/// Replication sweep over (system, n). Replications run on `threads`
/// workers; seeds are derived per replication and the report is folded in
/// (system, n, selector, replication) order, so the result does not depend
/// on scheduling.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                       const std::function<void(const std::string&)>& progress = {})
{
  cfg.validate();
  struct Task
  {
    std::size_t system_index, n, replication;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < cfg.systems.size(); ++s)
    for (auto n : cfg.sample_sizes)
      for (std::size_t r = 0; r < cfg.replications; ++r)
        tasks.push_back({s, n, r});

  std::vector<MapSystem> systems;
  std::vector<std::vector<double>> truths;
  const MetricGrid metric(cfg.ame_m);
  for (auto kind : cfg.systems) {
    systems.push_back(MapSystem::make(kind));
    truths.push_back(density_values(systems.back(), metric));
  }

  std::vector<ReplicationOutcome> outcomes(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const auto& task = tasks[t];
      try {
        outcomes[t] = run_replication(cfg, systems[task.system_index], task.n, task.replication, metric,
                                      truths[task.system_index]);
      } catch (...) {
        failures[t] = std::current_exception();
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(systems[task.system_index].name() + " n=" + std::to_string(task.n) +
                 " replication " + std::to_string(task.replication + 1) + "/" +
                 std::to_string(cfg.replications));
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < count; ++k)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();
  for (const auto& f : failures)
    if (f)
      std::rethrow_exception(f);

  ExperimentReport report;
  report.config = cfg;
  std::size_t t = 0;
  for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
    for (auto n : cfg.sample_sizes) {
      for (std::size_t k = 0; k < cfg.selectors.size(); ++k) {
        ReportRow row;
        row.system = cfg.systems[s];
        row.n = n;
        row.selector = cfg.selectors[k];
        for (std::size_t r = 0; r < cfg.replications; ++r) {
          row.ames.push_back(outcomes[t + r].ame[k]);
          row.h_stars.push_back(outcomes[t + r].h_star[k]);
        }
        row.mean_ame = detail::mean_of(row.ames);
        row.std_ame = detail::std_of(row.ames);
        report.rows.push_back(std::move(row));
      }
      t += cfg.replications;
    }
  }
  return report;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const ExperimentConfig& cfg)
{
  nlohmann::json j;
  j["systems"] = nlohmann::json::array();
  for (auto s : cfg.systems)
    j["systems"].push_back(std::string(to_string(s)));
  j["sample_sizes"] = cfg.sample_sizes;
  j["replications"] = cfg.replications;
  j["sigma"] = cfg.sigma;
  j["selectors"] = nlohmann::json::array();
  for (auto s : cfg.selectors)
    j["selectors"].push_back(std::string(to_string(s)));
  j["master_seed"] = cfg.master_seed;
  j["ame_m"] = cfg.ame_m;
  j["grid_count"] = cfg.grid_count;
  j["kernel"] = std::string(to_string(cfg.kernel));
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
  ExperimentConfig cfg;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "systems") {
        cfg.systems.clear();
        for (const auto& s : v)
          cfg.systems.push_back(parse_system_kind(s.get<std::string>()));
      } else if (key == "sample_sizes") {
        cfg.sample_sizes = v.get<std::vector<std::size_t>>();
      } else if (key == "replications") {
        cfg.replications = v.get<std::size_t>();
      } else if (key == "sigma") {
        cfg.sigma = v.get<double>();
      } else if (key == "selectors") {
        cfg.selectors.clear();
        for (const auto& s : v)
          cfg.selectors.push_back(parse_selector(s.get<std::string>()));
      } else if (key == "master_seed") {
        cfg.master_seed = v.get<std::uint64_t>();
      } else if (key == "ame_m") {
        cfg.ame_m = v.get<std::size_t>();
      } else if (key == "grid_count") {
        cfg.grid_count = v.get<std::size_t>();
      } else if (key == "kernel") {
        cfg.kernel = parse_kernel_kind(v.get<std::string>());
      } else {
        throw InvalidArgument("unknown experiment config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }
  return cfg;
}

/// Parses `key = value` lines (lists comma separated, `#` comments) or a
/// JSON object when the text starts with `{`.
inline ExperimentConfig parse_experiment_config(const std::string& text)
{
  const std::string body = io::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("malformed JSON config: ") + e.what());
    }
    auto cfg = config_from_json(j);
    cfg.validate();
    return cfg;
  }

  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto integer = [&](const std::string& v) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long parsed = 0;
    try {
      parsed = std::stoull(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty() || v.front() == '-')
      throw InvalidArgument("line " + std::to_string(line_no) + ": not a nonnegative integer: '" + v + "'");
    return parsed;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string row = io::trim(line.substr(0, hash));
    if (row.empty())
      continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = io::trim(row.substr(0, eq));
    const std::string value = io::trim(row.substr(eq + 1));
    std::vector<std::string> items;
    for (const auto& item : io::split(value, ','))
      if (auto t = io::trim(item); !t.empty())
        items.push_back(t);
    if (key == "systems" || key == "selectors") {
      j[key] = items;
    } else if (key == "sample_sizes") {
      j[key] = nlohmann::json::array();
      for (const auto& item : items)
        j[key].push_back(integer(item));
    } else if (key == "replications" || key == "master_seed" || key == "ame_m" || key == "grid_count") {
      j[key] = integer(value);
    } else if (key == "sigma") {
      j[key] = io::parse_double(value);
    } else if (key == "kernel") {
      j[key] = value;
    } else {
      throw InvalidArgument("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  auto cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const ExperimentReport& report)
{
  nlohmann::json j;
  j["config"] = to_json(report.config);
  j["master_seed"] = report.config.master_seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row;
    row["system"] = std::string(to_string(r.system));
    row["n"] = r.n;
    row["selector"] = std::string(to_string(r.selector));
    row["mean_ame"] = r.mean_ame;
    row["std_ame"] = r.std_ame;
    row["ames"] = r.ames;
    row["h_stars"] = r.h_stars;
    j["rows"].push_back(std::move(row));
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j)
{
  ExperimentReport report;
  try {
    report.config = config_from_json(j.at("config"));
    for (const auto& row : j.at("rows")) {
      ReportRow r;
      r.system = parse_system_kind(row.at("system").get<std::string>());
      r.n = row.at("n").get<std::size_t>();
      r.selector = parse_selector(row.at("selector").get<std::string>());
      r.mean_ame = row.at("mean_ame").get<double>();
      r.std_ame = row.at("std_ame").get<double>();
      r.ames = row.at("ames").get<std::vector<double>>();
      r.h_stars = row.at("h_stars").get<std::vector<double>>();
      report.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed report: ") + e.what());
  }
  return report;
}

inline std::string report_to_csv(const ExperimentReport& report)
{
  std::string out = "system,n,selector,mean_ame,std_ame\n";
  for (const auto& r : report.rows)
    out += std::string(to_string(r.system)) + ',' + std::to_string(r.n) + ',' + std::string(to_string(r.selector)) +
           ',' + io::format_double(r.mean_ame) + ',' + io::format_double(r.std_ame) + '\n';
  return out;
}

enum class ReportFormat
{
  csv,
  json
};

inline ReportFormat parse_report_format(std::string_view name)
{
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw InvalidArgument("unknown report format: " + std::string(name));
}

inline std::string format_report(const ExperimentReport& report, ReportFormat format)
{
  if (format == ReportFormat::csv)
    return report_to_csv(report);
  return to_json(report).dump(2) + '\n';
}

inline void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path)
{
  io::write_text(path, format_report(report, format));
}

inline ExperimentReport parse_report(const std::string& json_text)
{
  try {
    return report_from_json(nlohmann::json::parse(json_text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("malformed report: ") + e.what());
  }
}

// ---- density curves ------------------------------------------------------

struct DensityCurve
{
  std::vector<double> u;
  std::vector<double> f_true;
  std::vector<double> f_baseline; // NaN when the baseline was not requested
  std::vector<double> f_dkm;      // NaN when DKM was not requested
  double h_baseline = std::numeric_limits<double>::quiet_NaN();
  double h_dkm = std::numeric_limits<double>::quiet_NaN();
};

struct CurveOptions
{
  double sigma = 0.01;
  std::size_t points = 100;  // plotted midpoints in (0, 1)
  std::size_t ame_m = 10000; // baseline selection grid
  std::size_t grid_count = 100;
};

/// True density and the estimates at the baseline and DKM bandwidths on a
/// midpoint grid, from one trajectory.
inline DensityCurve density_curve(SystemKind kind, std::size_t n, std::span<const Selector> selectors,
                                  std::uint64_t seed, const CurveOptions& opts = {})
{
  for (auto s : selectors)
    detail::require(s == Selector::baseline || s == Selector::dkm, "curves cover the baseline and DKM only");
  const auto system = MapSystem::make(kind);
  TrajectoryConfig tcfg;
  tcfg.n = n;
  tcfg.sigma = opts.sigma;
  tcfg.seed = seed;
  const Sample sample = generate_trajectory(system, tcfg);
  const NormalizedKernel kernel(KernelKind::gaussian);
  const auto grid = bandwidth_grid(sample, kernel, opts.grid_count);

  const MetricGrid plot(opts.points);
  DensityCurve c;
  c.u = plot.points;
  c.f_true = density_values(system, plot);
  const std::vector<double> missing(plot.size(), std::numeric_limits<double>::quiet_NaN());
  c.f_baseline = missing;
  c.f_dkm = missing;
  const auto wants = [&](Selector s) { return std::find(selectors.begin(), selectors.end(), s) != selectors.end(); };
  if (wants(Selector::baseline)) {
    c.h_baseline = select_oracle_bandwidth(sample, grid, kernel, system, MetricGrid(opts.ame_m)).h_star;
    c.f_baseline = DensityEstimate(sample, kernel, c.h_baseline).evaluate(plot.points);
  }
  if (wants(Selector::dkm)) {
    c.h_dkm = select_bandwidth(Selector::dkm, sample, grid, kernel).h_star;
    c.f_dkm = DensityEstimate(sample, kernel, c.h_dkm).evaluate(plot.points);
  }
  return c;
}

inline std::string curve_to_csv(const DensityCurve& c)
{
  std::string out = "u,f_true,f_baseline,f_dkm\n";
  for (std::size_t i = 0; i < c.u.size(); ++i)
    out += io::format_double(c.u[i]) + ',' + io::format_double(c.f_true[i]) + ',' +
           io::format_double(c.f_baseline[i]) + ',' + io::format_double(c.f_dkm[i]) + '\n';
  return out;
}

inline DensityCurve emit_density_curve(SystemKind kind, std::size_t n, std::span<const Selector> selectors,
                                       std::uint64_t seed, const std::string& path, const CurveOptions& opts = {})
{
  auto c = density_curve(kind, n, selectors, seed, opts);
  io::write_text(path, curve_to_csv(c));
  return c;
}

} // namespace dynkde
