#include "panelfe/split_sample.hpp"

#include <Eigen/LU>

namespace panelfe {

bool Block::overlaps(const Block& o) const {
  const bool units = unit_begin < o.unit_end && o.unit_begin < unit_end;
  const bool periods = period_begin < o.period_end && o.period_begin < period_end;
  return units && periods;
}

BlockScheme make_blocks(int n, int t) {
  if (n < 2 || t < 2) throw DomainError("need at least two units and two periods");
  BlockScheme s;
  s.n = n;
  s.t = t;
  const int nh = n / 2;
  const int th = t / 2;
  s.estimation[0] = {0, nh, 0, th};
  s.estimation[1] = {0, nh, th, t};
  s.estimation[2] = {nh, n, 0, th};
  s.estimation[3] = {nh, n, th, t};
  s.proxy[0] = {0, n, 0, th};
  s.proxy[1] = {0, n, th, t};
  s.proxy[2] = {0, nh, 0, t};
  s.proxy[3] = {nh, n, 0, t};
  s.unit_proxy = {2, 1, 2, 1};
  s.time_proxy = {4, 4, 3, 3};
  return s;
}

ProxyFactors proxy_factors_for_block(const PanelData& panel, const BlockScheme& scheme,
                                     int block_id, const LsConfig& ls_cfg) {
  if (block_id < 1 || block_id > 4) throw DomainError("proxy block id must be 1..4");
  if (scheme.n != panel.n_units || scheme.t != panel.n_periods)
    throw DomainError("block scheme does not match the panel");
  const Block& b = scheme.proxy[static_cast<size_t>(block_id - 1)];
  const PanelData sub =
      panel.subpanel(b.unit_begin, b.unit_end, b.period_begin, b.period_end);
  const FactorEstimate fit = estimate_ls(sub, ls_cfg);
  ProxyFactors out;
  out.block_id = block_id;
  out.block = b;
  out.lambda = fit.lambda_hat;
  out.f = fit.f_hat;
  return out;
}

namespace {

SplitGroupings groupings_from_proxies(const BlockScheme& scheme,
                                      const std::array<ProxyFactors, 4>& proxies,
                                      int r_star) {
  for (int p = 0; p < 4; ++p) {
    if (proxies[static_cast<size_t>(p)].block_id != p + 1)
      throw DomainError("proxy factors out of order");
    if (r_star < 1 || r_star > proxies[static_cast<size_t>(p)].lambda.cols())
      throw DomainError("retained factor count exceeds proxy factor count");
  }
  SplitGroupings g;
  for (int s = 0; s < 4; ++s) {
    const Block& est = scheme.estimation[static_cast<size_t>(s)];
    const ProxyFactors& up = proxies[static_cast<size_t>(scheme.unit_proxy[static_cast<size_t>(s)] - 1)];
    const ProxyFactors& tp = proxies[static_cast<size_t>(scheme.time_proxy[static_cast<size_t>(s)] - 1)];
    /* rows of the proxy loadings/factors that belong to this block */
    const Eigen::MatrixXd lam = up.lambda.block(
        est.unit_begin - up.block.unit_begin, 0, est.n_units(), r_star);
    const Eigen::MatrixXd fac = tp.f.block(
        est.period_begin - tp.block.period_begin, 0, est.n_periods(), r_star);
    g.unit[static_cast<size_t>(s)] = cluster_rows(lam);
    g.time[static_cast<size_t>(s)] = cluster_rows(fac);
  }
  return g;
}

}  // namespace

SplitGroupings split_groupings(const PanelData& panel, const BlockScheme& scheme,
                               int r_initial, int r_star, const LsConfig& ls_cfg) {
  if (r_initial < 1) throw DomainError("first-stage factor count must be positive");
  LsConfig cfg = ls_cfg;
  cfg.r = r_initial;
  std::array<ProxyFactors, 4> proxies;
  for (int p = 1; p <= 4; ++p)
    proxies[static_cast<size_t>(p - 1)] = proxy_factors_for_block(panel, scheme, p, cfg);
  return groupings_from_proxies(scheme, proxies, r_star);
}

EstimateReport SplitEstimate::report() const {
  EstimateReport rep;
  rep.beta_hat = beta_hat;
  rep.tag = EstimatorTag::GFE_SPLIT;
  for (int s = 0; s < 4; ++s) {
    rep.metadata["unit_groups_" + std::to_string(s + 1)] =
        groupings.unit[static_cast<size_t>(s)].n_groups;
    rep.metadata["time_groups_" + std::to_string(s + 1)] =
        groupings.time[static_cast<size_t>(s)].n_groups;
  }
  return rep;
}

SplitEstimate estimate_gfe_split_with_proxies(const PanelData& panel,
                                              const BlockScheme& scheme,
                                              const std::array<ProxyFactors, 4>& proxies,
                                              int r_star) {
  panel.validate();
  const int k_count = panel.n_regressors();
  if (k_count < 1) throw DomainError("no regressors");
  if (scheme.n != panel.n_units || scheme.t != panel.n_periods)
    throw DomainError("block scheme does not match the panel");

  SplitEstimate est;
  est.scheme = scheme;
  est.groupings = groupings_from_proxies(scheme, proxies, r_star);

  /* per-block demeaning, one pooled regression across the four blocks */
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k_count, k_count);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k_count);
  for (int s = 0; s < 4; ++s) {
    const Block& blk = est.scheme.estimation[static_cast<size_t>(s)];
    const PanelData sub =
        panel.subpanel(blk.unit_begin, blk.unit_end, blk.period_begin, blk.period_end);
    const Grouping& ug = est.groupings.unit[static_cast<size_t>(s)];
    const Grouping& tg = est.groupings.time[static_cast<size_t>(s)];
    est.y_tilde[static_cast<size_t>(s)] = project_within(sub.y, ug, tg);
    auto& xt = est.x_tilde[static_cast<size_t>(s)];
    xt.clear();
    xt.reserve(static_cast<size_t>(k_count));
    for (const auto& xk : sub.x) xt.push_back(project_within(xk, ug, tg));
    for (int k = 0; k < k_count; ++k) {
      for (int l = k; l < k_count; ++l) {
        const double v = (xt[static_cast<size_t>(k)].array() *
                          xt[static_cast<size_t>(l)].array())
                             .sum();
        a(k, l) += v;
        if (l != k) a(l, k) += v;
      }
      b[k] += (xt[static_cast<size_t>(k)].array() *
               est.y_tilde[static_cast<size_t>(s)].array())
                  .sum();
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularDesignError("pooled projected cross-product matrix is singular");
  est.beta_hat = lu.solve(b);

  for (int s = 0; s < 4; ++s) {
    est.residuals[static_cast<size_t>(s)] = est.y_tilde[static_cast<size_t>(s)];
    for (int k = 0; k < k_count; ++k)
      est.residuals[static_cast<size_t>(s)].noalias() -=
          est.beta_hat[k] * est.x_tilde[static_cast<size_t>(s)][static_cast<size_t>(k)];
  }
  return est;
}

SplitEstimate estimate_gfe_split(const PanelData& panel, int r_initial, int r_star,
                                 const LsConfig& ls_cfg) {
  if (r_initial < 1) throw DomainError("first-stage factor count must be positive");
  const BlockScheme scheme = make_blocks(panel.n_units, panel.n_periods);
  LsConfig cfg = ls_cfg;
  cfg.r = r_initial;
  std::array<ProxyFactors, 4> proxies;
  for (int p = 1; p <= 4; ++p)
    proxies[static_cast<size_t>(p - 1)] = proxy_factors_for_block(panel, scheme, p, cfg);
  return estimate_gfe_split_with_proxies(panel, scheme, proxies, r_star);
}

}  // namespace panelfe
