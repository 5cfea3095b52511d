#pragma once

#include <Eigen/Dense>
#include <vector>

#include "panelfe/clustering.hpp"
#include "panelfe/factor_ls.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

/* M x G indicator matrix of the grouping, one 1 per row. */
Eigen::MatrixXd build_dummies(const Grouping& g);

/* Two-way within transformation on group structure: subtracts the
 * unit-group mean of each column and the time-group mean of each row,
 * then adds back the group-pair mean. Equals M_N * m * M_T for the
 * annihilators of the two dummy matrices, but runs in O(N*T). */
Eigen::MatrixXd project_within(const Eigen::MatrixXd& m,
                               const Grouping& unit_grouping,
                               const Grouping& time_grouping);

/* Pooled OLS on the two-way group-demeaned data. */
struct GroupedFEEstimate {
  Eigen::VectorXd beta_hat;
  Grouping unit_grouping;
  Grouping time_grouping;
  std::vector<Eigen::MatrixXd> x_tilde; /* projected regressors */
  Eigen::MatrixXd y_tilde;
  Eigen::MatrixXd residuals;            /* y_tilde - sum_k beta_k x_tilde_k */

  EstimateReport report() const;
};

GroupedFEEstimate estimate_gfe_given_groups(const PanelData& panel,
                                            const Grouping& unit_grouping,
                                            const Grouping& time_grouping);

/* Full pipeline: factor fit with r_initial factors, keep the r_star
 * leading columns of the loadings and factors, cluster each side into
 * pairs/triples, then run the grouped regression. */
GroupedFEEstimate estimate_gfe(const PanelData& panel, int r_initial, int r_star,
                               const LsConfig& ls_cfg);

/* The grouping stage alone, reusing an existing factor fit whose loadings
 * came from this panel. */
void groups_from_factors(const FactorEstimate& fit, int r_star,
                         Grouping& unit_grouping, Grouping& time_grouping);

}  // namespace panelfe
