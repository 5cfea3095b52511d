#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panelfe/errors.hpp"

namespace panelfe {

/* Balanced panel held as dense N x T matrices, one per variable.
 * Row i = unit, column t = period. gamma_true / beta_true are only
 * populated by the simulator and travel together. */
struct PanelData {
  int n_units = 0;
  int n_periods = 0;
  Eigen::MatrixXd y;                    /* N x T */
  std::vector<Eigen::MatrixXd> x;       /* K matrices, each N x T */
  std::optional<Eigen::MatrixXd> gamma_true;
  std::optional<Eigen::VectorXd> beta_true;
  std::vector<std::string> unit_labels; /* size N */
  std::vector<std::string> time_labels; /* size T */

  int n_regressors() const { return static_cast<int>(x.size()); }

  void validate() const;

  /* Copy of the rectangle [unit_begin, unit_end) x [period_begin, period_end). */
  PanelData subpanel(int unit_begin, int unit_end, int period_begin, int period_end) const;

  /* Copy keeping the given unit rows, in the given order (repeats allowed). */
  PanelData take_units(const std::vector<int>& unit_rows) const;
};

enum class EstimatorTag { OLS, LS, GFE, GFE_SPLIT };

std::string tag_name(EstimatorTag tag, bool jackknifed);

/* Common result surface for every estimator. se is absent until an
 * inference routine fills it. metadata carries named scalars such as
 * objective, iterations, group counts. */
struct EstimateReport {
  Eigen::VectorXd beta_hat;
  std::optional<Eigen::VectorXd> se;
  EstimatorTag tag = EstimatorTag::OLS;
  bool jackknifed = false;
  std::map<std::string, double> metadata;

  std::string tag_string() const { return tag_name(tag, jackknifed); }
  void validate() const;
};

}  // namespace panelfe
