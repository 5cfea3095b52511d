#pragma once

#include <Eigen/Dense>
#include <array>

#include "panelfe/grouped_fe.hpp"

namespace panelfe {

/* Half-open index rectangle [unit_begin, unit_end) x [period_begin, period_end). */
struct Block {
  int unit_begin = 0, unit_end = 0;
  int period_begin = 0, period_end = 0;

  int n_units() const { return unit_end - unit_begin; }
  int n_periods() const { return period_end - period_begin; }
  bool contains(int i, int t) const {
    return i >= unit_begin && i < unit_end && t >= period_begin && t < period_end;
  }
  bool overlaps(const Block& o) const;
};

/* Quadrant scheme: estimation blocks are the four quadrants cut at
 * floor(N/2) and floor(T/2); proxy blocks are the two row bands and two
 * column bands. Block s is grouped with loadings estimated on the proxy
 * block unit_proxy[s] and factors from time_proxy[s], chosen so each proxy
 * is disjoint from the estimation block it serves. Ids are 1-based. */
struct BlockScheme {
  int n = 0, t = 0;
  std::array<Block, 4> estimation;
  std::array<Block, 4> proxy;
  std::array<int, 4> unit_proxy; /* {2, 1, 2, 1} */
  std::array<int, 4> time_proxy; /* {4, 4, 3, 3} */
};

BlockScheme make_blocks(int n, int t);

/* Factor fit on one proxy block, tagged with the global index ranges its
 * loading/factor rows refer to. */
struct ProxyFactors {
  int block_id = 0; /* 1..4 */
  Block block;
  Eigen::MatrixXd lambda; /* rows follow block units */
  Eigen::MatrixXd f;      /* rows follow block periods */
};

ProxyFactors proxy_factors_for_block(const PanelData& panel, const BlockScheme& scheme,
                                     int block_id, const LsConfig& ls_cfg);

/* Groupings per estimation block, derived from proxy loadings/factors
 * truncated to their r_star leading columns. */
struct SplitGroupings {
  std::array<Grouping, 4> unit;
  std::array<Grouping, 4> time;
};

SplitGroupings split_groupings(const PanelData& panel, const BlockScheme& scheme,
                               int r_initial, int r_star, const LsConfig& ls_cfg);

/* Per-block two-way group demeaning pooled into one OLS. */
struct SplitEstimate {
  Eigen::VectorXd beta_hat;
  BlockScheme scheme;
  SplitGroupings groupings;
  std::array<std::vector<Eigen::MatrixXd>, 4> x_tilde; /* per block, per regressor */
  std::array<Eigen::MatrixXd, 4> y_tilde;
  std::array<Eigen::MatrixXd, 4> residuals;

  EstimateReport report() const;
};

SplitEstimate estimate_gfe_split(const PanelData& panel, int r_initial, int r_star,
                                 const LsConfig& ls_cfg);

/* Pooled stage alone, for callers that already fitted the proxy blocks
 * (proxies must be ordered by block id 1..4). */
SplitEstimate estimate_gfe_split_with_proxies(const PanelData& panel,
                                              const BlockScheme& scheme,
                                              const std::array<ProxyFactors, 4>& proxies,
                                              int r_star);

}  // namespace panelfe
