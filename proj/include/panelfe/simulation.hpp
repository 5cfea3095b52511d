#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panelfe/factor_ls.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

enum class KernelSign {
  Negative, /* Gaussian bump, the default */
  Positive, /* literal positive exponent; overflows for moderate |a-b| */
};

/* h(a, b) = exp(sign * (a-b)^2 / theta^2) / (sqrt(2*pi) * theta) */
double kernel_h(double a, double b, double theta, KernelSign sign);

struct EstimatorSpec {
  EstimatorTag kind = EstimatorTag::LS;
  int r = 20;            /* LS factor count */
  int r_initial = 20;    /* GFE / split first-stage factor count */
  int r_star = 2;        /* retained loading columns before clustering */
  bool jackknife = false;

  std::string label() const;
  static EstimatorSpec parse(const std::string& label); /* "ls5", "gfe-jk", ... */
  static std::vector<EstimatorSpec> parse_list(const std::string& csv);
  static std::vector<EstimatorSpec> default_set(); /* the nine benchmark rows */
};

struct SimConfig {
  int n = 100;
  int t = 100;
  double beta0 = 1.0;
  double theta = 0.125;
  KernelSign kernel_sign = KernelSign::Negative;
  std::uint64_t seed = 0;
  /* test hooks: scale the single-index component and the two noise draws */
  double gamma_scale = 1.0;
  double eps_scale = 1.0;
  double mu_scale = 1.0;
};

/* One replication of the benchmark design: alpha_i, gamma_t, eps_it, mu_it
 * all N(0,1) from the (seed, replication) stream; Gamma_it = h(alpha_i,
 * gamma_t); X = Gamma + mu; Y = X*beta0 + Gamma + eps. Stores gamma_true
 * and beta_true. */
PanelData generate_panel(const SimConfig& cfg, std::uint64_t replication);

/* Splits the grouped estimator's coefficient error into the pure-noise
 * part phi = S^-1 sum x_tilde * eps and the approximation part
 * kappa = S^-1 sum x_tilde * gamma_tilde, where S is the projected cross
 * product and gamma_tilde the group-projected low-rank component. Their
 * sum equals beta_hat - beta0. Requires simulation truth on the panel. */
struct ErrorDecomposition {
  Eigen::VectorXd phi;
  Eigen::VectorXd kappa;
};
class GroupedFEEstimate;
ErrorDecomposition decompose_error(const GroupedFEEstimate& est, const PanelData& panel);

struct MCConfig {
  SimConfig sim;
  int reps = 1000;
  std::vector<EstimatorSpec> estimators; /* empty = default_set() */
  LsConfig ls;                           /* seed field unused; derived per rep */
  int threads = 0;                       /* 0 = PANELFE_THREADS or hardware */
};

struct MCReport {
  struct Row {
    std::string label;
    double mean_bias = 0.0;
    double std_dev = 0.0;  /* across replications, ddof 1 */
    double mean_se = 0.0;
    double coverage = 0.0; /* share of 95% intervals covering beta0 */
    int n_fail = 0;
  };
  std::vector<Row> rows;
  int reps = 0;
  std::uint64_t seed = 0;
  std::string config_echo; /* resolved configuration, key=value list */

  std::string to_csv() const;
  std::string to_table() const;
};

/* Runs replications (in parallel when allowed), estimates every spec on
 * each, and aggregates in replication order so the report is identical
 * for any thread count. Failed fits are excluded per spec and counted. */
MCReport run_monte_carlo(const MCConfig& cfg);

}  // namespace panelfe
