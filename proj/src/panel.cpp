#include "panelfe/panel.hpp"

#include <cmath>

namespace panelfe {

void PanelData::validate() const {
  if (n_units <= 0 || n_periods <= 0)
    throw DomainError("panel must have at least one unit and one period");
  if (y.rows() != n_units || y.cols() != n_periods)
    throw DomainError("y dimensions do not match the panel");
  for (const auto& xk : x)
    if (xk.rows() != n_units || xk.cols() != n_periods)
      throw DomainError("regressor dimensions do not match the panel");
  if (!unit_labels.empty() && static_cast<int>(unit_labels.size()) != n_units)
    throw DomainError("unit label count does not match the panel");
  if (!time_labels.empty() && static_cast<int>(time_labels.size()) != n_periods)
    throw DomainError("time label count does not match the panel");
  if (gamma_true.has_value() != beta_true.has_value())
    throw DomainError("simulation truth fields must be set together");
  if (gamma_true &&
      (gamma_true->rows() != n_units || gamma_true->cols() != n_periods))
    throw DomainError("gamma_true dimensions do not match the panel");
  if (beta_true && beta_true->size() != n_regressors())
    throw DomainError("beta_true length does not match the regressor count");
}

PanelData PanelData::subpanel(int unit_begin, int unit_end, int period_begin,
                              int period_end) const {
  if (unit_begin < 0 || unit_end > n_units || unit_begin >= unit_end ||
      period_begin < 0 || period_end > n_periods || period_begin >= period_end)
    throw DomainError("subpanel range out of bounds");
  PanelData out;
  out.n_units = unit_end - unit_begin;
  out.n_periods = period_end - period_begin;
  const auto slice = [&](const Eigen::MatrixXd& m) {
    return m.block(unit_begin, period_begin, out.n_units, out.n_periods).eval();
  };
  out.y = slice(y);
  out.x.reserve(x.size());
  for (const auto& xk : x) out.x.push_back(slice(xk));
  if (gamma_true) out.gamma_true = slice(*gamma_true);
  if (beta_true) out.beta_true = beta_true;
  if (!unit_labels.empty())
    out.unit_labels.assign(unit_labels.begin() + unit_begin, unit_labels.begin() + unit_end);
  if (!time_labels.empty())
    out.time_labels.assign(time_labels.begin() + period_begin, time_labels.begin() + period_end);
  return out;
}

PanelData PanelData::take_units(const std::vector<int>& unit_rows) const {
  if (unit_rows.empty()) throw DomainError("take_units needs at least one row");
  for (int i : unit_rows)
    if (i < 0 || i >= n_units) throw DomainError("take_units row out of bounds");
  PanelData out;
  out.n_units = static_cast<int>(unit_rows.size());
  out.n_periods = n_periods;
  const auto gather = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd g(out.n_units, n_periods);
    for (int r = 0; r < out.n_units; ++r) g.row(r) = m.row(unit_rows[r]);
    return g;
  };
  out.y = gather(y);
  out.x.reserve(x.size());
  for (const auto& xk : x) out.x.push_back(gather(xk));
  if (gamma_true) out.gamma_true = gather(*gamma_true);
  if (beta_true) out.beta_true = beta_true;
  if (!unit_labels.empty()) {
    out.unit_labels.reserve(unit_rows.size());
    for (int i : unit_rows) out.unit_labels.push_back(unit_labels[i]);
  }
  out.time_labels = time_labels;
  return out;
}

std::string tag_name(EstimatorTag tag, bool jackknifed) {
  std::string base;
  switch (tag) {
    case EstimatorTag::OLS: base = "OLS"; break;
    case EstimatorTag::LS: base = "LS"; break;
    case EstimatorTag::GFE: base = "GFE"; break;
    case EstimatorTag::GFE_SPLIT: base = "GFE_SPLIT"; break;
  }
  return jackknifed ? base + "_JK" : base;
}

void EstimateReport::validate() const {
  if (beta_hat.size() == 0) throw DomainError("estimate has no coefficients");
  for (int k = 0; k < beta_hat.size(); ++k)
    if (!std::isfinite(beta_hat[k])) throw DomainError("non-finite coefficient");
  if (se) {
    if (se->size() != beta_hat.size())
      throw DomainError("standard error length does not match coefficients");
    for (int k = 0; k < se->size(); ++k)
      if (!(std::isfinite((*se)[k]) && (*se)[k] > 0.0))
        throw DomainError("standard errors must be positive");
  }
}

}  // namespace panelfe
