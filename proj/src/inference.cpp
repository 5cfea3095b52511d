#include "panelfe/inference.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "panelfe/parallel.hpp"
#include "panelfe/rng.hpp"

namespace panelfe {

Eigen::VectorXd se_from_parts(const SandwichParts& parts) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(parts.omega);
  if (!lu.isInvertible())
    throw SingularDesignError("cross-product matrix is singular in the sandwich");
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd v = inv * parts.sigma_hat * inv;
  Eigen::VectorXd se(v.rows());
  for (int k = 0; k < v.rows(); ++k)
    se[k] = parts.dfc * std::sqrt(std::max(v(k, k), 0.0));
  return se;
}

namespace {

/* Residualize columns (span = basis) out of m from the left. */
Eigen::MatrixXd annihilate_left(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& m) {
  if (basis.cols() == 0) return m;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  return m - basis * cod.solve(m);
}

Eigen::MatrixXd project_two_sided(const Eigen::MatrixXd& m, const Eigen::MatrixXd& lambda,
                                  const Eigen::MatrixXd& f) {
  const Eigen::MatrixXd left = annihilate_left(lambda, m);
  return annihilate_left(f, left.transpose()).transpose();
}

Eigen::MatrixXd cross_matrix(const std::vector<Eigen::MatrixXd>& x_tilde) {
  const int k_count = static_cast<int>(x_tilde.size());
  Eigen::MatrixXd a(k_count, k_count);
  for (int k = 0; k < k_count; ++k)
    for (int l = k; l < k_count; ++l) {
      a(k, l) = (x_tilde[static_cast<size_t>(k)].array() *
                 x_tilde[static_cast<size_t>(l)].array())
                    .sum();
      a(l, k) = a(k, l);
    }
  return a;
}

Eigen::MatrixXd diagonal_meat(const std::vector<Eigen::MatrixXd>& x_tilde,
                              const Eigen::MatrixXd& residuals) {
  const int k_count = static_cast<int>(x_tilde.size());
  const Eigen::ArrayXXd u2 = residuals.array().square();
  Eigen::MatrixXd s(k_count, k_count);
  for (int k = 0; k < k_count; ++k)
    for (int l = k; l < k_count; ++l) {
      s(k, l) = (u2 * x_tilde[static_cast<size_t>(k)].array() *
                 x_tilde[static_cast<size_t>(l)].array())
                    .sum();
      s(l, k) = s(k, l);
    }
  return s;
}

/* Accumulate per-cluster score sums into rows of `scores`; cluster ids in
 * `assignment` follow n(i,t) = i + t*N. */
void accumulate_scores(const std::vector<Eigen::MatrixXd>& x_tilde,
                       const Eigen::MatrixXd& residuals,
                       const std::vector<int>& assignment, Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(residuals.rows());
  const int t = static_cast<int>(residuals.cols());
  const int k_count = static_cast<int>(x_tilde.size());
  for (int j = 0; j < t; ++j)
    for (int i = 0; i < n; ++i) {
      const int m = assignment[static_cast<size_t>(i) + static_cast<size_t>(j) * n] - 1;
      const double u = residuals(i, j);
      for (int k = 0; k < k_count; ++k)
        scores(m, k) += u * x_tilde[static_cast<size_t>(k)](i, j);
    }
}

}  // namespace

SandwichParts hc_sandwich(const FactorEstimate& est, const PanelData& panel) {
  panel.validate();
  const int n = panel.n_units;
  const int t = panel.n_periods;
  const int r = est.r;
  if (n <= r || t <= r)
    throw DomainError("need more units and periods than factors for the correction");
  const int k_count = panel.n_regressors();
  if (static_cast<int>(est.beta_hat.size()) != k_count)
    throw DomainError("estimate does not match the panel");

  std::vector<Eigen::MatrixXd> x_tilde;
  x_tilde.reserve(static_cast<size_t>(k_count));
  for (const auto& xk : panel.x)
    x_tilde.push_back(project_two_sided(xk, est.lambda_hat, est.f_hat));
  const Eigen::MatrixXd y_tilde = project_two_sided(panel.y, est.lambda_hat, est.f_hat);
  Eigen::MatrixXd residuals = y_tilde;
  for (int k = 0; k < k_count; ++k)
    residuals.noalias() -= est.beta_hat[k] * x_tilde[static_cast<size_t>(k)];

  SandwichParts parts;
  parts.omega = cross_matrix(x_tilde);
  parts.sigma_hat = diagonal_meat(x_tilde, residuals);
  parts.dfc = std::sqrt(static_cast<double>(n) * t /
                        (static_cast<double>(n - r) * static_cast<double>(t - r)));
  return parts;
}

Eigen::VectorXd hc_se(const FactorEstimate& est, const PanelData& panel) {
  return se_from_parts(hc_sandwich(est, panel));
}

ClusterIndex ClusterIndex::combination(const Grouping& unit_grouping,
                                       const Grouping& time_grouping, int n, int t) {
  unit_grouping.validate();
  time_grouping.validate();
  if (static_cast<int>(unit_grouping.labels.size()) != n ||
      static_cast<int>(time_grouping.labels.size()) != t)
    throw DomainError("groupings do not match the panel dimensions");
  ClusterIndex idx;
  const int c_count = time_grouping.n_groups;
  idx.m_total = unit_grouping.n_groups * c_count;
  idx.assignment.resize(static_cast<size_t>(n) * t);
  for (int j = 0; j < t; ++j) {
    const int c = time_grouping.labels[static_cast<size_t>(j)];
    for (int i = 0; i < n; ++i) {
      const int g = unit_grouping.labels[static_cast<size_t>(i)];
      idx.assignment[static_cast<size_t>(i) + static_cast<size_t>(j) * n] =
          (g - 1) * c_count + c;
    }
  }
  return idx;
}

Eigen::MatrixXd cluster_meat(const std::vector<Eigen::MatrixXd>& x_tilde,
                             const Eigen::MatrixXd& residuals, const ClusterIndex& index) {
  if (index.assignment.size() !=
      static_cast<size_t>(residuals.rows()) * static_cast<size_t>(residuals.cols()))
    throw DomainError("cluster assignment does not match the panel");
  Eigen::MatrixXd scores =
      Eigen::MatrixXd::Zero(index.m_total, static_cast<int>(x_tilde.size()));
  accumulate_scores(x_tilde, residuals, index.assignment, scores);
  return scores.transpose() * scores;
}

SandwichParts cluster_sandwich(const GroupedFEEstimate& est, const PanelData& panel,
                               SigmaMode mode) {
  panel.validate();
  const int n = panel.n_units;
  const int t = panel.n_periods;
  const int g_count = est.unit_grouping.n_groups;
  const int c_count = est.time_grouping.n_groups;
  if (n <= g_count || t <= c_count)
    throw DomainError("need more units than unit groups and periods than time groups");

  SandwichParts parts;
  parts.omega = cross_matrix(est.x_tilde);
  if (mode == SigmaMode::Diagonal) {
    parts.sigma_hat = diagonal_meat(est.x_tilde, est.residuals);
  } else {
    parts.sigma_hat = cluster_meat(
        est.x_tilde, est.residuals,
        ClusterIndex::combination(est.unit_grouping, est.time_grouping, n, t));
  }
  parts.dfc = std::sqrt(static_cast<double>(n) * t /
                        (static_cast<double>(n - g_count) * static_cast<double>(t - c_count)));
  return parts;
}

Eigen::VectorXd cluster_se(const GroupedFEEstimate& est, const PanelData& panel,
                           SigmaMode mode) {
  return se_from_parts(cluster_sandwich(est, panel, mode));
}

SandwichParts cluster_sandwich(const SplitEstimate& est, const PanelData& panel,
                               SigmaMode mode) {
  panel.validate();
  const int n = panel.n_units;
  const int t = panel.n_periods;
  const int k_count = static_cast<int>(est.x_tilde[0].size());

  /* Group totals per half: blocks 1/3 partition the units on the early
   * periods, 2/4 on the late ones; 1/2 partition the periods for the first
   * unit half, 3/4 for the second. */
  const auto groups = [&](int s) { return est.groupings.unit[static_cast<size_t>(s)].n_groups; };
  const auto cgroups = [&](int s) { return est.groupings.time[static_cast<size_t>(s)].n_groups; };
  const double g_eff = 0.5 * (groups(0) + groups(2) + groups(1) + groups(3));
  const double c_eff = 0.5 * (cgroups(0) + cgroups(1) + cgroups(2) + cgroups(3));
  if (n <= g_eff || t <= c_eff)
    throw DomainError("need more units than unit groups and periods than time groups");

  SandwichParts parts;
  parts.omega = Eigen::MatrixXd::Zero(k_count, k_count);
  for (int s = 0; s < 4; ++s)
    parts.omega += cross_matrix(est.x_tilde[static_cast<size_t>(s)]);

  if (mode == SigmaMode::Diagonal) {
    parts.sigma_hat = Eigen::MatrixXd::Zero(k_count, k_count);
    for (int s = 0; s < 4; ++s)
      parts.sigma_hat += diagonal_meat(est.x_tilde[static_cast<size_t>(s)],
                                       est.residuals[static_cast<size_t>(s)]);
  } else {
    int m_total = 0;
    for (int s = 0; s < 4; ++s) m_total += groups(s) * cgroups(s);
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(m_total, k_count);
    int base = 0;
    for (int s = 0; s < 4; ++s) {
      const ClusterIndex idx = ClusterIndex::combination(
          est.groupings.unit[static_cast<size_t>(s)],
          est.groupings.time[static_cast<size_t>(s)],
          est.scheme.estimation[static_cast<size_t>(s)].n_units(),
          est.scheme.estimation[static_cast<size_t>(s)].n_periods());
      Eigen::MatrixXd block_scores = Eigen::MatrixXd::Zero(idx.m_total, k_count);
      accumulate_scores(est.x_tilde[static_cast<size_t>(s)],
                        est.residuals[static_cast<size_t>(s)], idx.assignment,
                        block_scores);
      scores.middleRows(base, idx.m_total) = block_scores;
      base += idx.m_total;
    }
    parts.sigma_hat = scores.transpose() * scores;
  }
  parts.dfc = std::sqrt(static_cast<double>(n) * t /
                        ((static_cast<double>(n) - g_eff) * (static_cast<double>(t) - c_eff)));
  return parts;
}

Eigen::VectorXd cluster_se(const SplitEstimate& est, const PanelData& panel,
                           SigmaMode mode) {
  return se_from_parts(cluster_sandwich(est, panel, mode));
}

Eigen::VectorXd bootstrap_cluster_se(const EstimatorFn& estimator, const PanelData& panel,
                                     const Grouping& cluster_on, int n_boot,
                                     std::uint64_t seed, int n_threads) {
  panel.validate();
  cluster_on.validate();
  if (static_cast<int>(cluster_on.labels.size()) != panel.n_units)
    throw DomainError("bootstrap clusters must partition the units");
  if (n_boot < 2) throw DomainError("need at least two bootstrap resamples");

  const auto members = cluster_on.members();
  const int g_count = cluster_on.n_groups;
  const int k_count = panel.n_regressors();

  std::vector<Eigen::VectorXd> betas(static_cast<size_t>(n_boot));
  std::vector<char> ok(static_cast<size_t>(n_boot), 0);
  parallel_for(n_boot, n_threads, [&](int b) {
    RngStream rng(seed, RngPurpose::Bootstrap, static_cast<std::uint64_t>(b));
    std::vector<int> rows;
    for (int d = 0; d < g_count; ++d) {
      const auto& grp = members[static_cast<size_t>(rng.uniform_int(g_count))];
      rows.insert(rows.end(), grp.begin(), grp.end());
    }
    try {
      const EstimateReport rep = estimator(panel.take_units(rows));
      if (rep.beta_hat.size() != k_count) throw DomainError("estimator changed K");
      betas[static_cast<size_t>(b)] = rep.beta_hat;
      ok[static_cast<size_t>(b)] = 1;
    } catch (const Error&) {
      /* failed resample: skipped, counted below */
    }
  });

  int n_ok = 0;
  for (char c : ok) n_ok += c;
  const int n_fail = n_boot - n_ok;
  if (n_fail * 10 > n_boot)
    throw BootstrapError("more than 10% of bootstrap resamples failed (" +
                         std::to_string(n_fail) + " of " + std::to_string(n_boot) + ")");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k_count);
  for (int b = 0; b < n_boot; ++b)
    if (ok[static_cast<size_t>(b)]) mean += betas[static_cast<size_t>(b)];
  mean /= n_ok;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(k_count);
  for (int b = 0; b < n_boot; ++b)
    if (ok[static_cast<size_t>(b)])
      ss += (betas[static_cast<size_t>(b)] - mean).cwiseAbs2();
  return (ss / std::max(n_ok - 1, 1)).cwiseSqrt();
}

Eigen::VectorXd jackknife_combine(const Eigen::VectorXd& full,
                                  const Eigen::VectorXd& units_first_half,
                                  const Eigen::VectorXd& units_second_half,
                                  const Eigen::VectorXd& periods_first_half,
                                  const Eigen::VectorXd& periods_second_half) {
  return 3.0 * full - 0.5 * (units_first_half + units_second_half) -
         0.5 * (periods_first_half + periods_second_half);
}

EstimateReport jackknife_correct(const EstimatorFn& estimator, const PanelData& panel) {
  panel.validate();
  const int n = panel.n_units;
  const int t = panel.n_periods;
  if (n < 2 || t < 2) throw DomainError("need at least two units and two periods");

  const EstimateReport full = estimator(panel);
  const auto half = [&](int ub, int ue, int pb, int pe, const char* label) {
    try {
      return estimator(panel.subpanel(ub, ue, pb, pe)).beta_hat;
    } catch (const Error& e) {
      throw JackknifeError(std::string("half-sample estimation failed on ") + label +
                           ": " + e.what());
    }
  };
  const Eigen::VectorXd u1 = half(0, n / 2, 0, t, "units 1..floor(N/2)");
  const Eigen::VectorXd u2 = half(n / 2, n, 0, t, "units floor(N/2)+1..N");
  const Eigen::VectorXd t1 = half(0, n, 0, t / 2, "periods 1..floor(T/2)");
  const Eigen::VectorXd t2 = half(0, n, t / 2, t, "periods floor(T/2)+1..T");
  if (u1.size() != full.beta_hat.size() || u2.size() != full.beta_hat.size() ||
      t1.size() != full.beta_hat.size() || t2.size() != full.beta_hat.size())
    throw JackknifeError("half-sample estimates have mismatched coefficient counts");

  EstimateReport out = full;
  out.beta_hat = jackknife_combine(full.beta_hat, u1, u2, t1, t2);
  out.jackknifed = true;
  return out;
}

}  // namespace panelfe
