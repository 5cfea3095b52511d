#pragma once

#include <string>

#include "panelfe/panel.hpp"

namespace panelfe {

/* Long format: header "unit_id,time_id,y,x1,...,xK", one row per cell.
 * Unit rows keep first-appearance order; time columns are sorted by label
 * (numerically when every label parses as a number, else lexicographically).
 * The grid must be complete: a missing cell raises BalanceError listing the
 * absent (unit, time) pairs, a duplicate cell raises ParseError with its
 * line number, as does any non-numeric value field. */
PanelData load_panel_csv(const std::string& path, int n_regressors);

/* Inverse of load_panel_csv for the same layout. Values are printed with
 * 17 significant digits so a round trip reproduces the panel bit for bit. */
void save_panel_csv(const PanelData& panel, const std::string& path);

/* Diagnostic sidecar: beta0 plus the simulated low-rank component. Requires
 * gamma_true/beta_true. */
void save_truth_csv(const PanelData& panel, const std::string& path);

}  // namespace panelfe
