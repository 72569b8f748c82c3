// Command-line front end: simulate trajectories, evaluate estimates, select
// bandwidths, evaluate rate schedules and thresholds, and run experiments.

#include "dynkde/dynkde.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace dynkde;

int run_simulate(const std::string& system_name, double beta, std::size_t n, double sigma, std::uint64_t seed,
                 std::optional<double> x0, const std::string& out)
{
  const auto kind = parse_system_kind(system_name);
  const auto system = kind == SystemKind::beta ? MapSystem::beta(beta) : MapSystem::make(kind);
  TrajectoryConfig cfg;
  cfg.n = n;
  cfg.sigma = sigma;
  cfg.seed = seed;
  cfg.x0 = x0;
  io::write_sample(out, generate_trajectory(system, cfg));
  return 0;
}

std::vector<double> read_queries(const std::string& source)
{
  const std::string prefix = "grid:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string count = source.substr(prefix.size());
    std::size_t used = 0;
    long long m = 0;
    try {
      m = std::stoll(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != count.size() || m < 1)
      throw InvalidArgument("query grid needs a positive point count, got '" + source + "'");
    return MetricGrid(static_cast<std::size_t>(m)).points;
  }
  return io::read_sample(source).values;
}

int run_estimate(const std::string& in, const std::string& kernel_name, double h, const std::string& queries,
                 const std::string& out)
{
  const auto sample = io::read_sample(in);
  const DensityEstimate est(sample, NormalizedKernel(parse_kernel_kind(kernel_name)), h);
  const auto x = read_queries(queries);
  const auto f = est.evaluate(x);
  std::string text = "x,fhat\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    text += io::format_double(x[i]) + ',' + io::format_double(f[i]) + '\n';
  io::write_text(out, text);
  return 0;
}

int run_select(const std::string& in, const std::string& selector_name, const std::string& kernel_name,
               const std::string& system_name, std::size_t grid_count, const std::string& out)
{
  const auto sample = io::read_sample(in);
  const auto selector = parse_selector(selector_name);
  const NormalizedKernel kernel(parse_kernel_kind(kernel_name));
  const auto grid = bandwidth_grid(sample, kernel, grid_count);
  SelectionResult result;
  if (selector == Selector::baseline) {
    if (system_name.empty())
      throw InvalidArgument("the baseline selector needs --system (true density of a simulated sample)");
    result = select_oracle_bandwidth(sample, grid, kernel, MapSystem::make(parse_system_kind(system_name)));
  } else {
    result = select_bandwidth(selector, sample, grid, kernel);
  }
  std::string text = "h,score\n";
  for (const auto& [h, score] : result.scores)
    text += io::format_double(h) + ',' + io::format_double(score) + '\n';
  text += "h_star," + io::format_double(result.h_star) + '\n';
  io::write_text(out, text);
  return 0;
}

int run_rates(const RateQuery& q)
{
  const auto r = rate_schedule(q);
  std::printf("h_n,%s\neps_n,%s\n", io::format_double(r.h).c_str(), io::format_double(r.eps).c_str());
  return 0;
}

int run_experiment_command(const std::string& config_path, const std::string& out, const std::string& format_name,
                           unsigned threads, bool quiet)
{
  const auto format = parse_report_format(format_name);
  const auto cfg = parse_experiment_config(io::read_text(config_path));
  std::function<void(const std::string&)> progress;
  if (!quiet)
    progress = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
  const auto report = run_experiment(cfg, threads, progress);
  emit_report(report, format, out);
  return 0;
}

int run_curves(const std::string& system_name, std::size_t n, const std::vector<std::string>& selector_names,
               std::uint64_t seed, double sigma, const std::string& out)
{
  std::vector<Selector> selectors;
  for (const auto& s : selector_names)
    selectors.push_back(parse_selector(s));
  CurveOptions opts;
  opts.sigma = sigma;
  const auto c = emit_density_curve(parse_system_kind(system_name), n, selectors, seed, out, opts);
  std::fprintf(stderr, "h_baseline=%s h_dkm=%s\n", io::format_double(c.h_baseline).c_str(),
               io::format_double(c.h_dkm).c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Kernel density estimation for ergodic dynamical systems"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a noisy trajectory of a chaotic map");
  std::string sim_system = "logistic", sim_out;
  double sim_beta = std::numbers::phi, sim_sigma = 0.01;
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  std::optional<double> sim_x0;
  sim->add_option("--system", sim_system, "logistic | gauss | beta")->capture_default_str();
  sim->add_option("--beta", sim_beta, "beta for the beta map")->capture_default_str();
  sim->add_option("--n", sim_n, "number of observations")->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "observation noise standard deviation")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--x0", sim_x0, "initial state (drawn from the invariant density when omitted)");
  sim->add_option("--out", sim_out, "output CSV (i,x)")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Evaluate a kernel density estimate");
  est->set_help_flag("--help", "Print this help message and exit"); // frees -h for the bandwidth
  std::string est_in, est_kernel = "gaussian", est_queries = "grid:100", est_out;
  double est_h = 0.0;
  est->add_option("--in", est_in, "sample CSV")->required();
  est->add_option("--kernel", est_kernel, "naive | triangle | epanechnikov | gaussian")->capture_default_str();
  est->add_option("--h", est_h, "bandwidth")->required();
  est->add_option("--queries", est_queries, "query CSV or grid:<m> for midpoints in (0,1)")->capture_default_str();
  est->add_option("--out", est_out, "output CSV (x,fhat)")->required();

  // select
  auto* sel = app.add_subcommand("select", "Select a bandwidth over the candidate grid");
  std::string sel_in, sel_selector = "dkm", sel_kernel = "gaussian", sel_system, sel_out;
  std::size_t sel_count = 100;
  sel->add_option("--in", sel_in, "sample CSV")->required();
  sel->add_option("--selector", sel_selector, "lscv | mlscv1 | mlscv2 | dkm | baseline")->capture_default_str();
  sel->add_option("--kernel", sel_kernel, "estimator kernel")->capture_default_str();
  sel->add_option("--system", sel_system, "true system, required by the baseline oracle");
  sel->add_option("--grid-count", sel_count, "number of candidate bandwidths")->capture_default_str();
  sel->add_option("--out", sel_out, "output CSV (h,score then h_star)")->required();

  // rates
  auto* rates = app.add_subcommand("rates", "Bandwidth and rate schedules of the L1 and sup-norm convergence bounds");
  RateQuery rq;
  std::string rate_case = "compact";
  bool proof_exponent = false;
  rates->add_option("--case", rate_case, "poly | exp | compact | linf")->capture_default_str();
  rates->add_option("--n", rq.n, "sample size")->capture_default_str();
  rates->add_option("--alpha", rq.alpha, "Hölder exponent of the density")->capture_default_str();
  rates->add_option("--d", rq.d, "dimension")->capture_default_str();
  rates->add_option("--gamma", rq.gamma, "mixing rate exponent")->capture_default_str();
  rates->add_option("--eta", rq.eta, "tail exponent")->capture_default_str();
  rates->add_option("--a", rq.a, "exponential tail scale")->capture_default_str();
  rates->add_flag("--proof-exponent", proof_exponent,
                  "exp case: use d/eta in the logarithmic correction instead of d/gamma");

  // thresholds
  auto* thr = app.add_subcommand("thresholds", "Minimal sample sizes of the concentration bounds");
  thr->set_help_flag("--help", "Print this help message and exit");
  MixingConstants mc;
  std::string thr_mode = "n1";
  double thr_h = 0.5, thr_r = 1.0, phi_c = 1.0, psi_c = 4.0 / 3.0;
  int thr_d = 1;
  thr->add_option("--mode", thr_mode, "n1 | n2 | n0_star")->capture_default_str();
  thr->add_option("--c0", mc.c0, "mixing constant c0")->capture_default_str();
  thr->add_option("--b", mc.b, "mixing constant b")->capture_default_str();
  thr->add_option("--gamma", mc.gamma, "mixing exponent gamma")->capture_default_str();
  thr->add_option("--K0", mc.K0, "kernel profile value at the origin")->capture_default_str();
  thr->add_option("--h", thr_h, "bandwidth (n1, n0_star)")->capture_default_str();
  thr->add_option("--d", thr_d, "dimension (n1, n0_star)")->capture_default_str();
  thr->add_option("--r", thr_r, "radius (n2)")->capture_default_str();
  thr->add_option("--phi-c", phi_c, "phi(h) = phi_c / h")->capture_default_str();
  thr->add_option("--psi-c", psi_c, "psi(r) = psi_c / r")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Replicated bandwidth-selection experiment");
  std::string exp_config, exp_out, exp_format = "csv";
  unsigned exp_threads = 1;
  bool exp_quiet = false;
  exp->add_option("--config", exp_config, "key=value or JSON config file")->required();
  exp->add_option("--out-report", exp_out, "report path")->required();
  exp->add_option("--format", exp_format, "csv | json")->capture_default_str();
  exp->add_option("--threads", exp_threads, "worker threads")->capture_default_str();
  exp->add_flag("--quiet", exp_quiet, "suppress progress lines");

  // curves
  auto* cur = app.add_subcommand("curves", "True density and selected estimates on 100 midpoints");
  std::string cur_system = "gauss", cur_out;
  std::size_t cur_n = 10000;
  std::vector<std::string> cur_selectors{"baseline", "dkm"};
  std::uint64_t cur_seed = 1;
  double cur_sigma = 0.01;
  cur->add_option("--system", cur_system, "logistic | gauss")->capture_default_str();
  cur->add_option("--n", cur_n, "number of observations")->capture_default_str();
  cur->add_option("--selectors", cur_selectors, "baseline and/or dkm")->delimiter(',')->capture_default_str();
  cur->add_option("--seed", cur_seed, "random seed")->capture_default_str();
  cur->add_option("--sigma", cur_sigma, "observation noise")->capture_default_str();
  cur->add_option("--out", cur_out, "output CSV (u,f_true,f_baseline,f_dkm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim)
      return run_simulate(sim_system, sim_beta, sim_n, sim_sigma, sim_seed, sim_x0, sim_out);
    if (*est)
      return run_estimate(est_in, est_kernel, est_h, est_queries, est_out);
    if (*sel)
      return run_select(sel_in, sel_selector, sel_kernel, sel_system, sel_count, sel_out);
    if (*rates) {
      rq.rate_case = parse_rate_case(rate_case);
      rq.correction = proof_exponent ? LogCorrection::proof : LogCorrection::statement;
      return run_rates(rq);
    }
    if (*thr) {
      mc.phi = [phi_c](double h) { return phi_c / h; };
      mc.psi = [psi_c](double r) { return psi_c / r; };
      const auto m = min_sample_size(mc, parse_threshold_mode(thr_mode), thr_h, thr_d, thr_r);
      std::printf("%llu\n", static_cast<unsigned long long>(m));
      return 0;
    }
    if (*exp)
      return run_experiment_command(exp_config, exp_out, exp_format, exp_threads, exp_quiet);
    if (*cur)
      return run_curves(cur_system, cur_n, cur_selectors, cur_seed, cur_sigma, cur_out);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
