#pragma once

#include <Eigen/Dense>

namespace panelfe {

/* Share of squared mass beyond the leading r singular values:
 * (||m||_F^2 - sum_{l<=r} sigma_l^2) / (N*T), clamped at zero against
 * round-off. r = 0 gives ||m||_F^2 / (N*T); r >= min(N,T) gives 0. */
double singular_tail_share(const Eigen::MatrixXd& m, int r);

}  // namespace panelfe
