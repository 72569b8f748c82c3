#include "dynkde/analysis.hpp"
#include "dynkde/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace dynkde;

namespace {

ExperimentConfig small_config()
{
  ExperimentConfig cfg;
  cfg.sample_sizes = {200, 400};
  cfg.replications = 3;
  cfg.ame_m = 2000;
  cfg.grid_count = 25;
  cfg.master_seed = 11;
  return cfg;
}

std::size_t count_lines(const std::string& s)
{
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST(Harness, ReportShape)
{
  const auto cfg = small_config();
  const auto report = run_experiment(cfg);
  ASSERT_EQ(report.rows.size(), 2u * 2u * 5u);
  for (const auto& row : report.rows) {
    ASSERT_EQ(row.ames.size(), cfg.replications);
    ASSERT_EQ(row.h_stars.size(), cfg.replications);
    double mean = 0.0;
    for (double a : row.ames)
      mean += a;
    EXPECT_NEAR(row.mean_ame, mean / 3.0, 1e-14);
    double ss = 0.0;
    for (double a : row.ames)
      ss += (a - row.mean_ame) * (a - row.mean_ame);
    EXPECT_NEAR(row.std_ame, std::sqrt(ss / 2.0), 1e-14);
  }
  EXPECT_NE(report.find(SystemKind::gauss, 400, Selector::dkm), nullptr);
  EXPECT_EQ(report.find(SystemKind::gauss, 300, Selector::dkm), nullptr);
}

TEST(Harness, OracleDominatesEveryReplication)
{
  const auto report = run_experiment(small_config());
  for (const auto& row : report.rows) {
    const auto* base = report.find(row.system, row.n, Selector::baseline);
    ASSERT_NE(base, nullptr);
    for (std::size_t r = 0; r < row.ames.size(); ++r)
      EXPECT_LE(base->ames[r], row.ames[r]);
    EXPECT_LE(base->mean_ame, row.mean_ame);
  }
}

TEST(Harness, ReportedAmeMatchesRecomputedEstimate)
{
  // rebuild one replication by hand and score the selected bandwidths directly
  const auto cfg = small_config();
  const auto report = run_experiment(cfg);
  const auto system = MapSystem::gauss();
  TrajectoryConfig t;
  t.n = 400;
  t.sigma = cfg.sigma;
  t.seed = derive_seed(cfg.master_seed, SystemKind::gauss, 400, 1);
  const auto sample = generate_trajectory(system, t);
  const NormalizedKernel kernel(KernelKind::gaussian);
  const auto grid = bandwidth_grid(sample, kernel, cfg.grid_count);
  for (auto sel : all_selectors()) {
    const auto* row = report.find(SystemKind::gauss, 400, sel);
    ASSERT_NE(row, nullptr);
    const double h = row->h_stars[1];
    EXPECT_NE(std::find(grid.values.begin(), grid.values.end(), h), grid.values.end());
    const DensityEstimate est(sample, kernel, h);
    EXPECT_NEAR(row->ames[1], ame(est, system, MetricGrid(cfg.ame_m)), 1e-12) << to_string(sel);
    if (sel != Selector::baseline) {
      EXPECT_EQ(h, select_bandwidth(sel, sample, grid, kernel).h_star) << to_string(sel);
    }
  }
}

TEST(Harness, DeterministicAndThreadIndependent)
{
  const auto cfg = small_config();
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 1);
  const auto c = run_experiment(cfg, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  auto other = cfg;
  other.master_seed = 12;
  EXPECT_NE(run_experiment(other).rows.front().ames, a.rows.front().ames);
}

TEST(Harness, ProgressCallbackSeesEveryReplication)
{
  auto cfg = small_config();
  cfg.systems = {SystemKind::gauss};
  cfg.sample_sizes = {100};
  std::size_t calls = 0;
  run_experiment(cfg, 2, [&](const std::string&) { ++calls; });
  EXPECT_EQ(calls, cfg.replications);
}

TEST(Harness, CsvAndJsonOutput)
{
  const auto report = run_experiment(small_config());
  const auto csv = report_to_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "system,n,selector,mean_ame,std_ame");
  EXPECT_EQ(count_lines(csv), 1 + report.rows.size());
  EXPECT_EQ(report_to_csv(ExperimentReport{}), "system,n,selector,mean_ame,std_ame\n");

  const auto back = parse_report(format_report(report, ReportFormat::json));
  EXPECT_EQ(back, report);

  const auto path = (std::filesystem::temp_directory_path() / "dynkde_report_test.csv").string();
  emit_report(report, ReportFormat::csv, path);
  EXPECT_EQ(io::read_text(path), csv);
  std::filesystem::remove(path);
  EXPECT_THROW(emit_report(report, ReportFormat::csv, "/nonexistent-dir/x.csv"), Error);
  EXPECT_THROW(parse_report("{not json"), InvalidArgument);
  EXPECT_THROW(parse_report_format("xml"), InvalidArgument);
}

TEST(Harness, ConfigParsing)
{
  const auto kv = parse_experiment_config("# comment\n"
                                          "systems = gauss\n"
                                          "sample_sizes = 100, 200\n"
                                          "replications = 2   # trailing\n"
                                          "selectors = dkm, baseline\n"
                                          "sigma = 0.02\n"
                                          "master_seed = 9\n");
  EXPECT_EQ(kv.systems, std::vector<SystemKind>{SystemKind::gauss});
  EXPECT_EQ(kv.sample_sizes, (std::vector<std::size_t>{100, 200}));
  EXPECT_EQ(kv.replications, 2u);
  EXPECT_EQ(kv.selectors, (std::vector<Selector>{Selector::dkm, Selector::baseline}));
  EXPECT_EQ(kv.sigma, 0.02);
  EXPECT_EQ(kv.master_seed, 9u);
  EXPECT_EQ(kv.ame_m, 10000u);

  const auto js = parse_experiment_config(R"({"systems": ["gauss"], "sample_sizes": [100, 200],
    "replications": 2, "selectors": ["dkm", "baseline"], "sigma": 0.02, "master_seed": 9})");
  EXPECT_EQ(js, kv);
  EXPECT_EQ(parse_experiment_config(to_json(kv).dump()), kv);
  EXPECT_EQ(parse_experiment_config(""), ExperimentConfig{});

  EXPECT_THROW(parse_experiment_config("colour = red\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("replications 3\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("replications = three\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("replications = 0\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("systems = beta\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("sample_sizes = 5\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("kernel = triangle\n"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"replications": "x"})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"unknown": 1})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("{broken"), InvalidArgument);
}

TEST(Harness, DensityCurves)
{
  const std::vector<Selector> both{Selector::baseline, Selector::dkm};
  CurveOptions opts;
  opts.ame_m = 2000;
  opts.grid_count = 30;
  const auto a = density_curve(SystemKind::logistic, 1000, both, 5, opts);
  const auto b = density_curve(SystemKind::logistic, 1000, both, 5, opts);
  ASSERT_EQ(a.u.size(), 100u);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.f_baseline, b.f_baseline);
  EXPECT_EQ(a.f_dkm, b.f_dkm);
  EXPECT_NEAR(a.u.front(), 0.005, 1e-15);
  EXPECT_NEAR(a.f_true[49], MapSystem::logistic().invariant_density(0.495), 1e-15);
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    EXPECT_TRUE(std::isfinite(a.f_baseline[i]));
    EXPECT_GE(a.f_dkm[i], 0.0);
  }

  const std::vector<Selector> only_dkm{Selector::dkm};
  const auto c = density_curve(SystemKind::gauss, 500, only_dkm, 5, opts);
  EXPECT_TRUE(std::isnan(c.h_baseline));
  EXPECT_TRUE(std::isnan(c.f_baseline[0]));
  const auto csv = curve_to_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "u,f_true,f_baseline,f_dkm");
  EXPECT_EQ(count_lines(csv), 101u);

  const std::vector<Selector> bad{Selector::lscv};
  EXPECT_THROW(density_curve(SystemKind::gauss, 500, bad, 5, opts), InvalidArgument);
}
