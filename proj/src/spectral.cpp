#include "panelfe/spectral.hpp"

#include <Eigen/SVD>
#include <algorithm>

#include "panelfe/errors.hpp"

namespace panelfe {

double singular_tail_share(const Eigen::MatrixXd& m, int r) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("empty matrix");
  if (r < 0) throw DomainError("r must be non-negative");
  const double total = m.squaredNorm();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m); /* values only */
  const auto& sv = svd.singularValues();
  double head = 0.0;
  const int lead = std::min<int>(r, static_cast<int>(sv.size()));
  for (int l = 0; l < lead; ++l) head += sv[l] * sv[l];
  const double tail = std::max(total - head, 0.0);
  return tail / (static_cast<double>(m.rows()) * static_cast<double>(m.cols()));
}

}  // namespace panelfe
