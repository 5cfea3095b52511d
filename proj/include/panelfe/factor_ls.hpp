#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "panelfe/panel.hpp"

namespace panelfe {

struct LsConfig {
  int r = 20;            /* number of factors; 0 reduces to pooled OLS */
  int n_starts = 5;      /* first start is pooled OLS, the rest perturb it */
  double tol = 1e-9;     /* relative objective change declaring convergence */
  int max_iter = 1000;
  std::uint64_t seed = 0;
};

/* Interactive fixed effects fit. lambda_hat is N x r, f_hat is T x r with
 * f_hat'f_hat/T = I and lambda_hat'lambda_hat diagonal, non-increasing.
 * objective is the sum of squared residuals of the reported fields. */
struct FactorEstimate {
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd lambda_hat;
  Eigen::MatrixXd f_hat;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int r = 0;

  EstimateReport report() const;
};

/* Per-start objective sequences, recorded when a sink is supplied. */
struct LsTrace {
  std::vector<std::vector<double>> objectives; /* one sequence per start */
  std::vector<double> final_objectives;
  int selected_start = -1;
};

/* Best rank-r approximation of residual, returned in the normalization
 * above. Exact-zero directions get an arbitrary orthonormal completion in
 * f with zero loadings. */
void pca_step(const Eigen::MatrixXd& residual, int r,
              Eigen::MatrixXd& lambda, Eigen::MatrixXd& f);

/* Least squares of y - lambda f' on the regressors.
 * Throws SingularDesignError when the cross-product matrix is singular. */
Eigen::VectorXd ols_step(const PanelData& panel, const Eigen::MatrixXd& lambda,
                         const Eigen::MatrixXd& f);

/* Alternates pca_step and ols_step from several starting values and keeps
 * the start with the lowest final objective (ties: lowest start index).
 * Deterministic given (panel, cfg). */
FactorEstimate estimate_ls(const PanelData& panel, const LsConfig& cfg,
                           LsTrace* trace = nullptr);

}  // namespace panelfe
