#include "panelfe.h"

#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "panelfe/csv.hpp"
#include "panelfe/inference.hpp"
#include "panelfe/simulation.hpp"

using namespace panelfe;

struct pfe_panel_s {
  PanelData data;
};

struct pfe_estimate_s {
  EstimateReport report;
  std::string tag;
  std::vector<std::pair<std::string, double>> metadata;
};

struct pfe_mc_report_s {
  MCReport report;
  std::string csv;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

pfe_status translate(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const ParseError*>(&e)) return PFE_ERROR_PARSE;
  if (dynamic_cast<const BalanceError*>(&e)) return PFE_ERROR_BALANCE;
  if (dynamic_cast<const SingularDesignError*>(&e)) return PFE_ERROR_SINGULAR_DESIGN;
  if (dynamic_cast<const JackknifeError*>(&e)) return PFE_ERROR_JACKKNIFE;
  if (dynamic_cast<const BootstrapError*>(&e)) return PFE_ERROR_BOOTSTRAP;
  if (dynamic_cast<const IoError*>(&e)) return PFE_ERROR_IO;
  if (dynamic_cast<const DomainError*>(&e)) return PFE_ERROR_DOMAIN;
  return PFE_ERROR_INTERNAL;
}

template <typename Fn>
pfe_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PFE_OK;
  } catch (const std::exception& e) {
    return translate(e);
  } catch (...) {
    set_error("unknown failure");
    return PFE_ERROR_INTERNAL;
  }
}

pfe_status usage_error(const std::string& msg) {
  set_error(msg);
  return PFE_ERROR_USAGE;
}

pfe_estimate_s* finish_estimate(EstimateReport rep) {
  auto* e = new pfe_estimate_s;
  e->report = std::move(rep);
  e->tag = e->report.tag_string();
  e->metadata.assign(e->report.metadata.begin(), e->report.metadata.end());
  return e;
}

}  // namespace

extern "C" {

const char* pfe_status_name(pfe_status s) {
  switch (s) {
    case PFE_OK: return "OK";
    case PFE_ERROR_USAGE: return "UsageError";
    case PFE_ERROR_PARSE: return "ParseError";
    case PFE_ERROR_BALANCE: return "BalanceError";
    case PFE_ERROR_DOMAIN: return "DomainError";
    case PFE_ERROR_SINGULAR_DESIGN: return "SingularDesignError";
    case PFE_ERROR_JACKKNIFE: return "JackknifeError";
    case PFE_ERROR_BOOTSTRAP: return "BootstrapError";
    case PFE_ERROR_IO: return "IoError";
    case PFE_ERROR_INTERNAL: return "InternalError";
  }
  return "InternalError";
}

const char* pfe_last_error(void) { return g_last_error.c_str(); }

pfe_status pfe_panel_load_csv(const char* path, int n_regressors, pfe_panel** out) {
  if (!path || !out) return usage_error("null argument");
  *out = nullptr;
  return guarded([&] {
    auto p = new pfe_panel_s{load_panel_csv(path, n_regressors)};
    *out = p;
  });
}

pfe_status pfe_panel_save_csv(const pfe_panel* p, const char* path) {
  if (!p || !path) return usage_error("null argument");
  return guarded([&] { save_panel_csv(p->data, path); });
}

pfe_status pfe_panel_save_truth_csv(const pfe_panel* p, const char* path) {
  if (!p || !path) return usage_error("null argument");
  return guarded([&] { save_truth_csv(p->data, path); });
}

void pfe_panel_free(pfe_panel* p) { delete p; }

int pfe_panel_units(const pfe_panel* p) { return p ? p->data.n_units : 0; }
int pfe_panel_periods(const pfe_panel* p) { return p ? p->data.n_periods : 0; }
int pfe_panel_regressors(const pfe_panel* p) { return p ? p->data.n_regressors() : 0; }

void pfe_sim_config_init(pfe_sim_config* cfg) {
  if (!cfg) return;
  cfg->n_units = 100;
  cfg->n_periods = 100;
  cfg->beta0 = 1.0;
  cfg->theta = 0.125;
  cfg->kernel_sign_positive = 0;
  cfg->seed = 0;
}

pfe_status pfe_panel_simulate(const pfe_sim_config* cfg, uint64_t replication,
                              pfe_panel** out) {
  if (!cfg || !out) return usage_error("null argument");
  *out = nullptr;
  return guarded([&] {
    SimConfig sim;
    sim.n = cfg->n_units;
    sim.t = cfg->n_periods;
    sim.beta0 = cfg->beta0;
    sim.theta = cfg->theta;
    sim.kernel_sign = cfg->kernel_sign_positive ? KernelSign::Positive : KernelSign::Negative;
    sim.seed = cfg->seed;
    auto p = new pfe_panel_s{generate_panel(sim, replication)};
    *out = p;
  });
}

void pfe_estimate_config_init(pfe_estimate_config* cfg, pfe_estimator_kind kind) {
  if (!cfg) return;
  std::memset(cfg, 0, sizeof(*cfg));
  cfg->estimator = kind;
  cfg->factors = 20;
  cfg->retained_factors = 2;
  cfg->n_starts = 5;
  cfg->tol = 1e-9;
  cfg->max_iter = 1000;
  cfg->seed = 0;
  cfg->jackknife = 0;
  cfg->se = (kind == PFE_ESTIMATOR_GFE || kind == PFE_ESTIMATOR_GFE_SPLIT)
                ? PFE_SE_CLUSTER
                : PFE_SE_HC;
  cfg->sigma_diagonal = 0;
  cfg->bootstrap_reps = 200;
  cfg->threads = 0;
}

pfe_status pfe_estimate_run(const pfe_panel* p, const pfe_estimate_config* cfg,
                            pfe_estimate** out) {
  if (!p || !cfg || !out) return usage_error("null argument");
  *out = nullptr;

  const bool grouped = cfg->estimator == PFE_ESTIMATOR_GFE ||
                       cfg->estimator == PFE_ESTIMATOR_GFE_SPLIT;
  if (cfg->se == PFE_SE_HC && grouped)
    return usage_error("hc standard errors apply to ols and ls only");
  if (cfg->se == PFE_SE_CLUSTER && !grouped)
    return usage_error("cluster standard errors apply to gfe and gfe-split only");
  if (cfg->se == PFE_SE_BOOTSTRAP && cfg->estimator != PFE_ESTIMATOR_GFE)
    return usage_error("bootstrap standard errors apply to gfe only");

  return guarded([&] {
    LsConfig ls;
    ls.r = cfg->estimator == PFE_ESTIMATOR_OLS ? 0 : cfg->factors;
    ls.n_starts = cfg->n_starts;
    ls.tol = cfg->tol;
    ls.max_iter = cfg->max_iter;
    ls.seed = cfg->seed;
    const SigmaMode sigma =
        cfg->sigma_diagonal ? SigmaMode::Diagonal : SigmaMode::FullCluster;
    const PanelData& panel = p->data;

    EstimatorFn runner;
    switch (cfg->estimator) {
      case PFE_ESTIMATOR_OLS:
      case PFE_ESTIMATOR_LS:
        runner = [&, ls](const PanelData& pd) {
          const FactorEstimate fit = estimate_ls(pd, ls);
          EstimateReport rep = fit.report();
          if (cfg->se == PFE_SE_HC) rep.se = hc_se(fit, pd);
          return rep;
        };
        break;
      case PFE_ESTIMATOR_GFE:
        runner = [&, ls](const PanelData& pd) {
          const GroupedFEEstimate fit =
              estimate_gfe(pd, cfg->factors, cfg->retained_factors, ls);
          EstimateReport rep = fit.report();
          if (cfg->se == PFE_SE_CLUSTER) rep.se = cluster_se(fit, pd, sigma);
          if (cfg->se == PFE_SE_BOOTSTRAP) {
            EstimatorFn inner = [&, ls](const PanelData& sub) {
              return estimate_gfe(sub, cfg->factors, cfg->retained_factors, ls).report();
            };
            rep.se = bootstrap_cluster_se(inner, pd, fit.unit_grouping,
                                          cfg->bootstrap_reps, cfg->seed, cfg->threads);
          }
          return rep;
        };
        break;
      case PFE_ESTIMATOR_GFE_SPLIT:
        runner = [&, ls](const PanelData& pd) {
          const SplitEstimate fit =
              estimate_gfe_split(pd, cfg->factors, cfg->retained_factors, ls);
          EstimateReport rep = fit.report();
          if (cfg->se == PFE_SE_CLUSTER) rep.se = cluster_se(fit, pd, sigma);
          return rep;
        };
        break;
      default:
        throw DomainError("unknown estimator kind");
    }

    EstimateReport rep = cfg->jackknife ? jackknife_correct(runner, panel) : runner(panel);
    rep.validate();
    *out = finish_estimate(std::move(rep));
  });
}

void pfe_estimate_free(pfe_estimate* e) { delete e; }

int pfe_estimate_n_coef(const pfe_estimate* e) {
  return e ? static_cast<int>(e->report.beta_hat.size()) : 0;
}

pfe_status pfe_estimate_beta(const pfe_estimate* e, double* out, int len) {
  if (!e || !out) return usage_error("null argument");
  if (len < e->report.beta_hat.size()) return usage_error("buffer too small");
  for (int k = 0; k < e->report.beta_hat.size(); ++k) out[k] = e->report.beta_hat[k];
  return PFE_OK;
}

int pfe_estimate_has_se(const pfe_estimate* e) {
  return e && e->report.se.has_value() ? 1 : 0;
}

pfe_status pfe_estimate_se(const pfe_estimate* e, double* out, int len) {
  if (!e || !out) return usage_error("null argument");
  if (!e->report.se) return usage_error("estimate carries no standard errors");
  if (len < e->report.se->size()) return usage_error("buffer too small");
  for (int k = 0; k < e->report.se->size(); ++k) out[k] = (*e->report.se)[k];
  return PFE_OK;
}

const char* pfe_estimate_tag(const pfe_estimate* e) { return e ? e->tag.c_str() : ""; }

int pfe_estimate_n_metadata(const pfe_estimate* e) {
  return e ? static_cast<int>(e->metadata.size()) : 0;
}

const char* pfe_estimate_metadata_name(const pfe_estimate* e, int idx) {
  if (!e || idx < 0 || idx >= static_cast<int>(e->metadata.size())) return "";
  return e->metadata[static_cast<size_t>(idx)].first.c_str();
}

double pfe_estimate_metadata_value(const pfe_estimate* e, int idx) {
  if (!e || idx < 0 || idx >= static_cast<int>(e->metadata.size())) return 0.0;
  return e->metadata[static_cast<size_t>(idx)].second;
}

void pfe_mc_config_init(pfe_mc_config* cfg) {
  if (!cfg) return;
  pfe_sim_config_init(&cfg->sim);
  cfg->reps = 1000;
  cfg->estimators = nullptr;
  cfg->n_starts = 5;
  cfg->tol = 1e-9;
  cfg->max_iter = 1000;
  cfg->threads = 0;
}

pfe_status pfe_mc_run(const pfe_mc_config* cfg, pfe_mc_report** out) {
  if (!cfg || !out) return usage_error("null argument");
  *out = nullptr;
  return guarded([&] {
    MCConfig mc;
    mc.sim.n = cfg->sim.n_units;
    mc.sim.t = cfg->sim.n_periods;
    mc.sim.beta0 = cfg->sim.beta0;
    mc.sim.theta = cfg->sim.theta;
    mc.sim.kernel_sign =
        cfg->sim.kernel_sign_positive ? KernelSign::Positive : KernelSign::Negative;
    mc.sim.seed = cfg->sim.seed;
    mc.reps = cfg->reps;
    if (cfg->estimators && *cfg->estimators)
      mc.estimators = EstimatorSpec::parse_list(cfg->estimators);
    mc.ls.n_starts = cfg->n_starts;
    mc.ls.tol = cfg->tol;
    mc.ls.max_iter = cfg->max_iter;
    mc.threads = cfg->threads;
    auto* r = new pfe_mc_report_s;
    r->report = run_monte_carlo(mc);
    r->csv = r->report.to_csv();
    r->table = r->report.to_table();
    *out = r;
  });
}

void pfe_mc_report_free(pfe_mc_report* r) { delete r; }

int pfe_mc_report_rows(const pfe_mc_report* r) {
  return r ? static_cast<int>(r->report.rows.size()) : 0;
}

const char* pfe_mc_report_label(const pfe_mc_report* r, int row) {
  if (!r || row < 0 || row >= static_cast<int>(r->report.rows.size())) return "";
  return r->report.rows[static_cast<size_t>(row)].label.c_str();
}

double pfe_mc_report_stat(const pfe_mc_report* r, int row, pfe_mc_stat stat) {
  if (!r || row < 0 || row >= static_cast<int>(r->report.rows.size())) return 0.0;
  const auto& rr = r->report.rows[static_cast<size_t>(row)];
  switch (stat) {
    case PFE_MC_MEAN_BIAS: return rr.mean_bias;
    case PFE_MC_STD_DEV: return rr.std_dev;
    case PFE_MC_MEAN_SE: return rr.mean_se;
    case PFE_MC_COVERAGE: return rr.coverage;
    case PFE_MC_N_FAIL: return rr.n_fail;
  }
  return 0.0;
}

const char* pfe_mc_report_config_echo(const pfe_mc_report* r) {
  return r ? r->report.config_echo.c_str() : "";
}

pfe_status pfe_mc_report_write_csv(const pfe_mc_report* r, const char* path) {
  if (!r || !path) return usage_error("null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot write ") + path);
    out << r->csv;
    if (!out) throw IoError(std::string("write failed for ") + path);
  });
}

const char* pfe_mc_report_table(const pfe_mc_report* r) {
  return r ? r->table.c_str() : "";
}

} /* extern "C" */
