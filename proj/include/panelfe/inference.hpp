#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "panelfe/factor_ls.hpp"
#include "panelfe/grouped_fe.hpp"
#include "panelfe/panel.hpp"
#include "panelfe/split_sample.hpp"

namespace panelfe {

struct SandwichParts {
  Eigen::MatrixXd omega;     /* K x K cross product of projected regressors */
  Eigen::MatrixXd sigma_hat; /* K x K meat */
  double dfc = 1.0;
};

Eigen::VectorXd se_from_parts(const SandwichParts& parts);

/* Heteroskedasticity-robust variance for the factor estimator. Regressors
 * and outcome are residualized on the spans of lambda_hat and f_hat from
 * both sides; dfc = sqrt(NT / ((N-R)(T-R))). */
SandwichParts hc_sandwich(const FactorEstimate& est, const PanelData& panel);
Eigen::VectorXd hc_se(const FactorEstimate& est, const PanelData& panel);

/* Cell (i,t) belongs to combination cluster (unit group of i, time group
 * of t); assignment is indexed by n(i,t) = i + t*N (0-based). */
struct ClusterIndex {
  std::vector<int> assignment; /* size N*T, values in 1..m_total */
  int m_total = 0;

  static ClusterIndex combination(const Grouping& unit_grouping,
                                  const Grouping& time_grouping, int n, int t);
};

enum class SigmaMode {
  FullCluster, /* sum over clusters of outer products of within-cluster score sums */
  Diagonal,    /* per-cell outer products only, no cross terms */
};

/* Meat for an arbitrary cluster assignment: sum over clusters of the outer
 * product of within-cluster score sums. With every cell its own cluster
 * this collapses to the per-cell (heteroskedasticity) form. */
Eigen::MatrixXd cluster_meat(const std::vector<Eigen::MatrixXd>& x_tilde,
                             const Eigen::MatrixXd& residuals, const ClusterIndex& index);

/* Cluster-robust variance for the grouped estimator over combination
 * clusters; dfc = sqrt(NT / ((N-G)(T-C))). */
SandwichParts cluster_sandwich(const GroupedFEEstimate& est, const PanelData& panel,
                               SigmaMode mode = SigmaMode::FullCluster);
Eigen::VectorXd cluster_se(const GroupedFEEstimate& est, const PanelData& panel,
                           SigmaMode mode = SigmaMode::FullCluster);

/* Same estimator applied blockwise: clusters are (block, unit group, time
 * group) combinations; the dfc uses the per-half totals of group counts. */
SandwichParts cluster_sandwich(const SplitEstimate& est, const PanelData& panel,
                               SigmaMode mode = SigmaMode::FullCluster);
Eigen::VectorXd cluster_se(const SplitEstimate& est, const PanelData& panel,
                           SigmaMode mode = SigmaMode::FullCluster);

using EstimatorFn = std::function<EstimateReport(const PanelData&)>;

/* Resamples whole unit clusters with replacement, re-runs the estimator on
 * each rebuilt panel, and returns the across-resample standard deviation
 * of the coefficients. Failed resamples are skipped; more than 10% of them
 * failing raises BootstrapError. */
Eigen::VectorXd bootstrap_cluster_se(const EstimatorFn& estimator, const PanelData& panel,
                                     const Grouping& cluster_on, int n_boot,
                                     std::uint64_t seed, int n_threads = 0);

/* Half-panel bias correction: 3*full - mean of the two unit-half fits
 * - mean of the two period-half fits. Calls the estimator on the full
 * panel, units [1, floor(N/2)] / rest, periods [1, floor(T/2)] / rest, in
 * that order. se is copied from the full-sample estimate. A failing half
 * raises JackknifeError naming it. */
EstimateReport jackknife_correct(const EstimatorFn& estimator, const PanelData& panel);

/* The combination rule alone, shared with callers that already hold the
 * five fits. */
Eigen::VectorXd jackknife_combine(const Eigen::VectorXd& full,
                                  const Eigen::VectorXd& units_first_half,
                                  const Eigen::VectorXd& units_second_half,
                                  const Eigen::VectorXd& periods_first_half,
                                  const Eigen::VectorXd& periods_second_half);

}  // namespace panelfe
