/* Command line front end. Talks to the library through the C interface
 * only; everything estimation-related lives behind panelfe.h. */
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "panelfe.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEstimation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int exit_code_for(pfe_status s) {
  switch (s) {
    case PFE_OK: return kExitOk;
    case PFE_ERROR_USAGE:
    case PFE_ERROR_PARSE:
    case PFE_ERROR_BALANCE: return kExitUsage;
    case PFE_ERROR_IO: return kExitIo;
    default: return kExitEstimation;
  }
}

int fail(pfe_status s) {
  std::cerr << "error: " << pfe_status_name(s) << ": " << pfe_last_error() << "\n";
  return exit_code_for(s);
}

int fail_usage(const std::string& msg) {
  std::cerr << "error: UsageError: " << msg << "\n";
  return kExitUsage;
}

struct SimulateArgs {
  int n = 0, t = 0;
  double beta0 = 1.0, theta = 0.125;
  std::string kernel_sign = "negative";
  std::uint64_t seed = 0, rep = 0;
  std::string out, sidecar;
};

int run_simulate(const SimulateArgs& a) {
  if (!(a.theta > 0.0)) return fail_usage("--theta must be positive");
  if (a.kernel_sign != "negative" && a.kernel_sign != "positive")
    return fail_usage("--kernel-sign must be negative or positive");

  pfe_sim_config cfg;
  pfe_sim_config_init(&cfg);
  cfg.n_units = a.n;
  cfg.n_periods = a.t;
  cfg.beta0 = a.beta0;
  cfg.theta = a.theta;
  cfg.kernel_sign_positive = a.kernel_sign == "positive" ? 1 : 0;
  cfg.seed = a.seed;

  pfe_panel* panel = nullptr;
  pfe_status s = pfe_panel_simulate(&cfg, a.rep, &panel);
  if (s != PFE_OK) return fail(s);
  s = pfe_panel_save_csv(panel, a.out.c_str());
  if (s == PFE_OK && !a.sidecar.empty())
    s = pfe_panel_save_truth_csv(panel, a.sidecar.c_str());
  pfe_panel_free(panel);
  if (s != PFE_OK) return fail(s);

  std::cout << "wrote " << a.out;
  if (!a.sidecar.empty()) std::cout << " and " << a.sidecar;
  std::cout << " (n=" << a.n << ";t=" << a.t << ";beta0=" << a.beta0
            << ";theta=" << a.theta << ";kernel_sign=" << a.kernel_sign
            << ";seed=" << a.seed << ";rep=" << a.rep << ")\n";
  return kExitOk;
}

struct EstimateArgs {
  std::string in;
  int regressors = 1;
  std::string estimator;
  int factors = 20;
  int retained = 2;
  bool jackknife = false;
  std::string se = "auto";
  std::string sigma = "full";
  int boot_reps = 200;
  std::uint64_t seed = 0;
  int starts = 5;
  double tol = 1e-9;
  int max_iter = 1000;
  int threads = 0;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  pfe_estimator_kind kind;
  if (a.estimator == "ols") kind = PFE_ESTIMATOR_OLS;
  else if (a.estimator == "ls") kind = PFE_ESTIMATOR_LS;
  else if (a.estimator == "gfe") kind = PFE_ESTIMATOR_GFE;
  else if (a.estimator == "gfe-split") kind = PFE_ESTIMATOR_GFE_SPLIT;
  else return fail_usage("--estimator must be one of ols, ls, gfe, gfe-split");

  pfe_estimate_config cfg;
  pfe_estimate_config_init(&cfg, kind);
  cfg.factors = a.factors;
  cfg.retained_factors = a.retained;
  cfg.n_starts = a.starts;
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.seed = a.seed;
  cfg.jackknife = a.jackknife ? 1 : 0;
  cfg.bootstrap_reps = a.boot_reps;
  cfg.threads = a.threads;

  std::string se = a.se;
  if (se == "auto")
    se = (kind == PFE_ESTIMATOR_GFE || kind == PFE_ESTIMATOR_GFE_SPLIT) ? "cluster" : "hc";
  if (se == "none") cfg.se = PFE_SE_NONE;
  else if (se == "hc") cfg.se = PFE_SE_HC;
  else if (se == "cluster") cfg.se = PFE_SE_CLUSTER;
  else if (se == "bootstrap") cfg.se = PFE_SE_BOOTSTRAP;
  else return fail_usage("--se must be one of auto, none, hc, cluster, bootstrap");

  if (a.sigma == "diagonal") cfg.sigma_diagonal = 1;
  else if (a.sigma != "full") return fail_usage("--sigma must be full or diagonal");

  pfe_panel* panel = nullptr;
  pfe_status s = pfe_panel_load_csv(a.in.c_str(), a.regressors, &panel);
  if (s != PFE_OK) return fail(s);

  pfe_estimate* est = nullptr;
  s = pfe_estimate_run(panel, &cfg, &est);
  const int n = pfe_panel_units(panel);
  const int t = pfe_panel_periods(panel);
  pfe_panel_free(panel);
  if (s != PFE_OK) return fail(s);

  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["estimator"] = pfe_estimate_tag(est);
  const int k = pfe_estimate_n_coef(est);
  std::vector<double> beta(static_cast<size_t>(k));
  pfe_estimate_beta(est, beta.data(), k);
  doc["beta_hat"] = beta;
  if (pfe_estimate_has_se(est)) {
    std::vector<double> se_v(static_cast<size_t>(k));
    pfe_estimate_se(est, se_v.data(), k);
    doc["se"] = se_v;
  } else {
    doc["se"] = nullptr;
  }
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (int i = 0; i < pfe_estimate_n_metadata(est); ++i)
    meta[pfe_estimate_metadata_name(est, i)] = pfe_estimate_metadata_value(est, i);
  doc["metadata"] = meta;
  pfe_estimate_free(est);

  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  conf["in"] = a.in;
  conf["n"] = n;
  conf["t"] = t;
  conf["regressors"] = a.regressors;
  conf["estimator"] = a.estimator;
  conf["factors"] = a.factors;
  conf["retained"] = a.retained;
  conf["jackknife"] = a.jackknife;
  conf["se"] = se;
  conf["sigma"] = a.sigma;
  conf["boot_reps"] = a.boot_reps;
  conf["seed"] = a.seed;
  conf["starts"] = a.starts;
  conf["tol"] = a.tol;
  conf["max_iter"] = a.max_iter;
  conf["threads"] = a.threads == 0 ? nlohmann::ordered_json("auto")
                                   : nlohmann::ordered_json(a.threads);
  doc["config"] = conf;

  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(a.out);
    if (!f) {
      std::cerr << "error: IoError: cannot write " << a.out << "\n";
      return kExitIo;
    }
    f << text;
    std::cout << "wrote " << a.out << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  int reps = 0;
  int n = 100, t = 100;
  double beta0 = 1.0, theta = 0.125;
  std::string kernel_sign = "negative";
  std::string estimators;
  std::uint64_t seed = 0;
  int starts = 5;
  double tol = 1e-9;
  int max_iter = 1000;
  int threads = 0;
  std::string out;
};

int run_mc_bench(const BenchArgs& a) {
  if (!(a.theta > 0.0)) return fail_usage("--theta must be positive");
  if (a.kernel_sign != "negative" && a.kernel_sign != "positive")
    return fail_usage("--kernel-sign must be negative or positive");

  pfe_mc_config cfg;
  pfe_mc_config_init(&cfg);
  cfg.sim.n_units = a.n;
  cfg.sim.n_periods = a.t;
  cfg.sim.beta0 = a.beta0;
  cfg.sim.theta = a.theta;
  cfg.sim.kernel_sign_positive = a.kernel_sign == "positive" ? 1 : 0;
  cfg.sim.seed = a.seed;
  cfg.reps = a.reps;
  cfg.estimators = a.estimators.empty() ? nullptr : a.estimators.c_str();
  cfg.n_starts = a.starts;
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.threads = a.threads;

  pfe_mc_report* report = nullptr;
  pfe_status s = pfe_mc_run(&cfg, &report);
  if (s != PFE_OK) return fail(s);

  std::cout << "config: " << pfe_mc_report_config_echo(report) << "\n";
  std::cout << pfe_mc_report_table(report);
  if (!a.out.empty()) {
    s = pfe_mc_report_write_csv(report, a.out.c_str());
    if (s != PFE_OK) {
      pfe_mc_report_free(report);
      return fail(s);
    }
    std::cout << "wrote " << a.out << "\n";
  }
  pfe_mc_report_free(report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panel regressions with two-way grouped heterogeneity"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate a benchmark panel CSV");
  c_sim->add_option("--n", sim.n, "units")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--t", sim.t, "periods")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--beta0", sim.beta0, "true coefficient");
  c_sim->add_option("--theta", sim.theta, "kernel bandwidth");
  c_sim->add_option("--kernel-sign", sim.kernel_sign, "negative|positive");
  c_sim->add_option("--seed", sim.seed, "rng seed");
  c_sim->add_option("--rep", sim.rep, "replication index");
  c_sim->add_option("--out", sim.out, "panel CSV path")->required();
  c_sim->add_option("--sidecar", sim.sidecar, "truth CSV path (beta0 + low-rank component)");

  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand("estimate", "Estimate coefficients from a panel CSV");
  c_est->add_option("--in", est.in, "panel CSV path")->required();
  c_est->add_option("--regressors", est.regressors, "number of x columns")
      ->check(CLI::PositiveNumber);
  c_est->add_option("--estimator", est.estimator, "ols|ls|gfe|gfe-split")->required();
  c_est->add_option("--factors", est.factors, "factor count (ls), first-stage count (gfe)")
      ->check(CLI::NonNegativeNumber);
  c_est->add_option("--retained", est.retained, "loading columns kept before grouping")
      ->check(CLI::PositiveNumber);
  c_est->add_flag("--jackknife", est.jackknife, "half-panel bias correction");
  c_est->add_option("--se", est.se, "auto|none|hc|cluster|bootstrap");
  c_est->add_option("--sigma", est.sigma, "full|diagonal cluster meat");
  c_est->add_option("--boot-reps", est.boot_reps, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  c_est->add_option("--seed", est.seed, "rng seed");
  c_est->add_option("--starts", est.starts, "starting values")->check(CLI::PositiveNumber);
  c_est->add_option("--tol", est.tol, "relative objective tolerance");
  c_est->add_option("--max-iter", est.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  c_est->add_option("--threads", est.threads, "bootstrap workers (0 = auto)");
  c_est->add_option("--out", est.out, "write JSON here instead of stdout");

  BenchArgs bench;
  CLI::App* c_mc = app.add_subcommand("mc-bench", "Replication benchmark over simulated panels");
  c_mc->add_option("--reps", bench.reps, "replications")->required()->check(CLI::PositiveNumber);
  c_mc->add_option("--n", bench.n, "units")->check(CLI::PositiveNumber);
  c_mc->add_option("--t", bench.t, "periods")->check(CLI::PositiveNumber);
  c_mc->add_option("--beta0", bench.beta0, "true coefficient");
  c_mc->add_option("--theta", bench.theta, "kernel bandwidth");
  c_mc->add_option("--kernel-sign", bench.kernel_sign, "negative|positive");
  c_mc->add_option("--estimators", bench.estimators,
                   "comma list, e.g. ls5,ls20-jk,gfe,gfe-split (default: nine benchmark rows)");
  c_mc->add_option("--seed", bench.seed, "rng seed");
  c_mc->add_option("--starts", bench.starts, "starting values")->check(CLI::PositiveNumber);
  c_mc->add_option("--tol", bench.tol, "relative objective tolerance");
  c_mc->add_option("--max-iter", bench.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  c_mc->add_option("--threads", bench.threads, "worker cap (0 = PANELFE_THREADS or hardware)");
  c_mc->add_option("--out", bench.out, "report CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); /* --help */
    app.exit(e);
    return kExitUsage;
  }

  if (c_sim->parsed()) return run_simulate(sim);
  if (c_est->parsed()) return run_estimate(est);
  return run_mc_bench(bench);
}
