/* C interface to the panel estimation library. All objects are opaque;
 * every fallible call returns a status code and leaves a thread-local
 * message retrievable via pfe_last_error(). */
#ifndef PANELFE_H
#define PANELFE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PFE_API __declspec(dllexport)
#else
#define PFE_API __attribute__((visibility("default")))
#endif

typedef enum pfe_status {
  PFE_OK = 0,
  PFE_ERROR_USAGE,           /* bad argument to an API call */
  PFE_ERROR_PARSE,           /* malformed input file */
  PFE_ERROR_BALANCE,         /* incomplete panel grid */
  PFE_ERROR_DOMAIN,          /* parameter outside its admissible range */
  PFE_ERROR_SINGULAR_DESIGN, /* rank-deficient regressor cross product */
  PFE_ERROR_JACKKNIFE,       /* a half-sample re-estimation failed */
  PFE_ERROR_BOOTSTRAP,       /* too many resamples failed */
  PFE_ERROR_IO,              /* file system failure */
  PFE_ERROR_INTERNAL
} pfe_status;

PFE_API const char* pfe_status_name(pfe_status s);

/* Message for the most recent failure on this thread; empty string if none. */
PFE_API const char* pfe_last_error(void);

typedef struct pfe_panel_s pfe_panel;
typedef struct pfe_estimate_s pfe_estimate;
typedef struct pfe_mc_report_s pfe_mc_report;

/* ---- panels ---- */

PFE_API pfe_status pfe_panel_load_csv(const char* path, int n_regressors,
                                      pfe_panel** out);
PFE_API pfe_status pfe_panel_save_csv(const pfe_panel* p, const char* path);
/* beta0 + simulated low-rank component; only defined for simulated panels */
PFE_API pfe_status pfe_panel_save_truth_csv(const pfe_panel* p, const char* path);
PFE_API void pfe_panel_free(pfe_panel* p);
PFE_API int pfe_panel_units(const pfe_panel* p);
PFE_API int pfe_panel_periods(const pfe_panel* p);
PFE_API int pfe_panel_regressors(const pfe_panel* p);

/* ---- simulation ---- */

typedef struct pfe_sim_config {
  int n_units;
  int n_periods;
  double beta0;
  double theta;
  int kernel_sign_positive; /* 0 = Gaussian bump (default), 1 = literal positive exponent */
  uint64_t seed;
} pfe_sim_config;

PFE_API void pfe_sim_config_init(pfe_sim_config* cfg);
PFE_API pfe_status pfe_panel_simulate(const pfe_sim_config* cfg, uint64_t replication,
                                      pfe_panel** out);

/* ---- estimation ---- */

typedef enum pfe_estimator_kind {
  PFE_ESTIMATOR_OLS = 0,
  PFE_ESTIMATOR_LS,
  PFE_ESTIMATOR_GFE,
  PFE_ESTIMATOR_GFE_SPLIT
} pfe_estimator_kind;

typedef enum pfe_se_mode {
  PFE_SE_NONE = 0,
  PFE_SE_HC,        /* OLS and LS */
  PFE_SE_CLUSTER,   /* GFE and GFE split */
  PFE_SE_BOOTSTRAP  /* GFE only; resamples its unit groups */
} pfe_se_mode;

typedef struct pfe_estimate_config {
  pfe_estimator_kind estimator;
  int factors;           /* LS factor count, or the first-stage count for GFE */
  int retained_factors;  /* loading columns kept before grouping (GFE) */
  int n_starts;
  double tol;
  int max_iter;
  uint64_t seed;
  int jackknife;         /* 0/1 */
  pfe_se_mode se;
  int sigma_diagonal;    /* cluster meat without cross terms */
  int bootstrap_reps;
  int threads;           /* bootstrap workers; 0 = auto */
} pfe_estimate_config;

/* Fills defaults appropriate to the estimator kind, including its usual
 * standard error mode. */
PFE_API void pfe_estimate_config_init(pfe_estimate_config* cfg, pfe_estimator_kind kind);
PFE_API pfe_status pfe_estimate_run(const pfe_panel* p, const pfe_estimate_config* cfg,
                                    pfe_estimate** out);
PFE_API void pfe_estimate_free(pfe_estimate* e);

PFE_API int pfe_estimate_n_coef(const pfe_estimate* e);
PFE_API pfe_status pfe_estimate_beta(const pfe_estimate* e, double* out, int len);
PFE_API int pfe_estimate_has_se(const pfe_estimate* e);
PFE_API pfe_status pfe_estimate_se(const pfe_estimate* e, double* out, int len);
PFE_API const char* pfe_estimate_tag(const pfe_estimate* e);
PFE_API int pfe_estimate_n_metadata(const pfe_estimate* e);
PFE_API const char* pfe_estimate_metadata_name(const pfe_estimate* e, int idx);
PFE_API double pfe_estimate_metadata_value(const pfe_estimate* e, int idx);

/* ---- benchmark runs ---- */

typedef struct pfe_mc_config {
  pfe_sim_config sim;
  int reps;
  const char* estimators; /* comma list like "ls5,ls20-jk,gfe,gfe-split"; NULL = default nine */
  int n_starts;
  double tol;
  int max_iter;
  int threads;
} pfe_mc_config;

typedef enum pfe_mc_stat {
  PFE_MC_MEAN_BIAS = 0,
  PFE_MC_STD_DEV,
  PFE_MC_MEAN_SE,
  PFE_MC_COVERAGE,
  PFE_MC_N_FAIL
} pfe_mc_stat;

PFE_API void pfe_mc_config_init(pfe_mc_config* cfg);
PFE_API pfe_status pfe_mc_run(const pfe_mc_config* cfg, pfe_mc_report** out);
PFE_API void pfe_mc_report_free(pfe_mc_report* r);
PFE_API int pfe_mc_report_rows(const pfe_mc_report* r);
PFE_API const char* pfe_mc_report_label(const pfe_mc_report* r, int row);
PFE_API double pfe_mc_report_stat(const pfe_mc_report* r, int row, pfe_mc_stat stat);
PFE_API const char* pfe_mc_report_config_echo(const pfe_mc_report* r);
PFE_API pfe_status pfe_mc_report_write_csv(const pfe_mc_report* r, const char* path);
/* Aligned human-readable table; caller keeps the pointer alive via the report. */
PFE_API const char* pfe_mc_report_table(const pfe_mc_report* r);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PANELFE_H */
