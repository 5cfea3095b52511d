#include "panelfe/grouped_fe.hpp"

#include <Eigen/LU>

namespace panelfe {

Eigen::MatrixXd build_dummies(const Grouping& g) {
  g.validate();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<int>(g.labels.size()), g.n_groups);
  for (size_t i = 0; i < g.labels.size(); ++i)
    d(static_cast<int>(i), g.labels[i] - 1) = 1.0;
  return d;
}

Eigen::MatrixXd project_within(const Eigen::MatrixXd& m, const Grouping& unit_grouping,
                               const Grouping& time_grouping) {
  const int n = static_cast<int>(m.rows());
  const int t = static_cast<int>(m.cols());
  unit_grouping.validate();
  time_grouping.validate();
  if (static_cast<int>(unit_grouping.labels.size()) != n)
    throw DomainError("unit grouping does not match row count");
  if (static_cast<int>(time_grouping.labels.size()) != t)
    throw DomainError("time grouping does not match column count");
  const int g_count = unit_grouping.n_groups;
  const int c_count = time_grouping.n_groups;

  /* group sums: unit-group x period, unit x time-group, group pair */
  Eigen::MatrixXd sum_gt = Eigen::MatrixXd::Zero(g_count, t);
  for (int i = 0; i < n; ++i)
    sum_gt.row(unit_grouping.labels[static_cast<size_t>(i)] - 1) += m.row(i);
  Eigen::MatrixXd sum_ic = Eigen::MatrixXd::Zero(n, c_count);
  Eigen::MatrixXd sum_gc = Eigen::MatrixXd::Zero(g_count, c_count);
  for (int j = 0; j < t; ++j) {
    const int c = time_grouping.labels[static_cast<size_t>(j)] - 1;
    sum_ic.col(c) += m.col(j);
    sum_gc.col(c) += sum_gt.col(j);
  }

  Eigen::MatrixXd out(n, t);
  for (int j = 0; j < t; ++j) {
    const int c = time_grouping.labels[static_cast<size_t>(j)] - 1;
    const double tc = time_grouping.sizes[static_cast<size_t>(c)];
    for (int i = 0; i < n; ++i) {
      const int g = unit_grouping.labels[static_cast<size_t>(i)] - 1;
      const double ng = unit_grouping.sizes[static_cast<size_t>(g)];
      out(i, j) = m(i, j) - sum_gt(g, j) / ng - sum_ic(i, c) / tc +
                  sum_gc(g, c) / (ng * tc);
    }
  }
  return out;
}

EstimateReport GroupedFEEstimate::report() const {
  EstimateReport rep;
  rep.beta_hat = beta_hat;
  rep.tag = EstimatorTag::GFE;
  rep.metadata["unit_groups"] = unit_grouping.n_groups;
  rep.metadata["time_groups"] = time_grouping.n_groups;
  return rep;
}

GroupedFEEstimate estimate_gfe_given_groups(const PanelData& panel,
                                            const Grouping& unit_grouping,
                                            const Grouping& time_grouping) {
  panel.validate();
  const int k_count = panel.n_regressors();
  if (k_count < 1) throw DomainError("no regressors");

  GroupedFEEstimate est;
  est.unit_grouping = unit_grouping;
  est.time_grouping = time_grouping;
  est.y_tilde = project_within(panel.y, unit_grouping, time_grouping);
  est.x_tilde.reserve(static_cast<size_t>(k_count));
  for (const auto& xk : panel.x)
    est.x_tilde.push_back(project_within(xk, unit_grouping, time_grouping));

  Eigen::MatrixXd a(k_count, k_count);
  Eigen::VectorXd b(k_count);
  for (int k = 0; k < k_count; ++k) {
    for (int l = k; l < k_count; ++l) {
      a(k, l) = (est.x_tilde[static_cast<size_t>(k)].array() *
                 est.x_tilde[static_cast<size_t>(l)].array())
                    .sum();
      a(l, k) = a(k, l);
    }
    b[k] = (est.x_tilde[static_cast<size_t>(k)].array() * est.y_tilde.array()).sum();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularDesignError("projected regressor cross-product matrix is singular");
  est.beta_hat = lu.solve(b);

  est.residuals = est.y_tilde;
  for (int k = 0; k < k_count; ++k)
    est.residuals.noalias() -= est.beta_hat[k] * est.x_tilde[static_cast<size_t>(k)];
  return est;
}

void groups_from_factors(const FactorEstimate& fit, int r_star,
                         Grouping& unit_grouping, Grouping& time_grouping) {
  if (r_star < 1 || r_star > fit.r)
    throw DomainError("retained factor count must lie in [1, r]");
  /* columns are already ordered by loading mass, so the leading ones are
   * the leftmost */
  unit_grouping = cluster_rows(fit.lambda_hat.leftCols(r_star));
  time_grouping = cluster_rows(fit.f_hat.leftCols(r_star));
}

GroupedFEEstimate estimate_gfe(const PanelData& panel, int r_initial, int r_star,
                               const LsConfig& ls_cfg) {
  if (r_initial < 1) throw DomainError("first-stage factor count must be positive");
  LsConfig cfg = ls_cfg;
  cfg.r = r_initial;
  const FactorEstimate fit = estimate_ls(panel, cfg);
  Grouping unit_grouping, time_grouping;
  groups_from_factors(fit, r_star, unit_grouping, time_grouping);
  return estimate_gfe_given_groups(panel, unit_grouping, time_grouping);
}

}  // namespace panelfe
