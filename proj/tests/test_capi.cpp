#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "panelfe.h"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
           "/pfe_capi_" + name;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("status names and the error message channel") {
  CHECK(std::string(pfe_status_name(PFE_OK)) == "OK");
  CHECK(std::string(pfe_status_name(PFE_ERROR_PARSE)) == "ParseError");
  CHECK(std::string(pfe_status_name(PFE_ERROR_SINGULAR_DESIGN)) ==
        "SingularDesignError");

  pfe_panel* p = nullptr;
  CHECK(pfe_panel_load_csv("/nonexistent/panel.csv", 1, &p) == PFE_ERROR_IO);
  CHECK(p == nullptr);
  CHECK(std::string(pfe_last_error()).find("/nonexistent/panel.csv") !=
        std::string::npos);
}

TEST_CASE("argument validation returns usage errors") {
  CHECK(pfe_panel_load_csv(nullptr, 1, nullptr) == PFE_ERROR_USAGE);
  pfe_panel* p = nullptr;
  CHECK(pfe_panel_load_csv(nullptr, 1, &p) == PFE_ERROR_USAGE);
  CHECK(pfe_panel_simulate(nullptr, 0, &p) == PFE_ERROR_USAGE);
  CHECK(pfe_estimate_run(nullptr, nullptr, nullptr) == PFE_ERROR_USAGE);
  CHECK(pfe_mc_run(nullptr, nullptr) == PFE_ERROR_USAGE);
  CHECK(pfe_panel_units(nullptr) == 0);
  CHECK(pfe_estimate_n_coef(nullptr) == 0);
}

TEST_CASE("malformed csv maps to parse and balance statuses") {
  TempFile bad("bad.csv");
  write_file(bad.path, "unit_id,time_id,y,x1\n1,1,0.5,abc\n");
  pfe_panel* p = nullptr;
  CHECK(pfe_panel_load_csv(bad.path.c_str(), 1, &p) == PFE_ERROR_PARSE);

  TempFile holes("holes.csv");
  write_file(holes.path,
             "unit_id,time_id,y,x1\n1,1,0.5,0.1\n1,2,0.5,0.1\n2,1,0.5,0.1\n");
  CHECK(pfe_panel_load_csv(holes.path.c_str(), 1, &p) == PFE_ERROR_BALANCE);
}

TEST_CASE("simulate, save, reload, estimate") {
  pfe_sim_config sim;
  pfe_sim_config_init(&sim);
  CHECK(sim.n_units == 100);
  CHECK(sim.beta0 == 1.0);
  CHECK(sim.theta == 0.125);
  CHECK(sim.kernel_sign_positive == 0);
  sim.n_units = 24;
  sim.n_periods = 24;
  sim.seed = 9;

  pfe_panel* p = nullptr;
  REQUIRE(pfe_panel_simulate(&sim, 0, &p) == PFE_OK);
  REQUIRE(p != nullptr);
  CHECK(pfe_panel_units(p) == 24);
  CHECK(pfe_panel_periods(p) == 24);
  CHECK(pfe_panel_regressors(p) == 1);

  TempFile panel_csv("panel.csv");
  TempFile truth_csv("truth.csv");
  REQUIRE(pfe_panel_save_csv(p, panel_csv.path.c_str()) == PFE_OK);
  REQUIRE(pfe_panel_save_truth_csv(p, truth_csv.path.c_str()) == PFE_OK);

  pfe_panel* q = nullptr;
  REQUIRE(pfe_panel_load_csv(panel_csv.path.c_str(), 1, &q) == PFE_OK);
  CHECK(pfe_panel_units(q) == 24);

  // a reloaded panel has no simulation truth to save
  CHECK(pfe_panel_save_truth_csv(q, truth_csv.path.c_str()) == PFE_ERROR_DOMAIN);

  pfe_estimate_config cfg;
  pfe_estimate_config_init(&cfg, PFE_ESTIMATOR_LS);
  CHECK(cfg.estimator == PFE_ESTIMATOR_LS);
  CHECK(cfg.factors == 20);
  CHECK(cfg.se == PFE_SE_HC);
  cfg.factors = 3;

  pfe_estimate* on_sim = nullptr;
  pfe_estimate* on_loaded = nullptr;
  REQUIRE(pfe_estimate_run(p, &cfg, &on_sim) == PFE_OK);
  REQUIRE(pfe_estimate_run(q, &cfg, &on_loaded) == PFE_OK);

  double beta_sim = 0, beta_loaded = 0;
  REQUIRE(pfe_estimate_beta(on_sim, &beta_sim, 1) == PFE_OK);
  REQUIRE(pfe_estimate_beta(on_loaded, &beta_loaded, 1) == PFE_OK);
  CHECK(beta_sim == doctest::Approx(beta_loaded).epsilon(1e-12));
  CHECK(std::abs(beta_sim - 1.0) < 0.5);

  CHECK(pfe_estimate_n_coef(on_sim) == 1);
  CHECK(pfe_estimate_has_se(on_sim) == 1);
  double se = 0;
  REQUIRE(pfe_estimate_se(on_sim, &se, 1) == PFE_OK);
  CHECK(se > 0.0);
  CHECK(std::string(pfe_estimate_tag(on_sim)) == "LS");

  bool saw_objective = false;
  for (int i = 0; i < pfe_estimate_n_metadata(on_sim); ++i)
    if (std::string(pfe_estimate_metadata_name(on_sim, i)) == "objective") {
      saw_objective = true;
      CHECK(pfe_estimate_metadata_value(on_sim, i) >= 0.0);
    }
  CHECK(saw_objective);

  CHECK(pfe_estimate_beta(on_sim, &beta_sim, 0) == PFE_ERROR_USAGE);

  pfe_estimate_free(on_sim);
  pfe_estimate_free(on_loaded);
  pfe_panel_free(p);
  pfe_panel_free(q);
}

TEST_CASE("estimator and se mode combinations are validated") {
  pfe_sim_config sim;
  pfe_sim_config_init(&sim);
  sim.n_units = 16;
  sim.n_periods = 16;
  sim.seed = 4;
  pfe_panel* p = nullptr;
  REQUIRE(pfe_panel_simulate(&sim, 0, &p) == PFE_OK);

  pfe_estimate_config cfg;
  pfe_estimate_config_init(&cfg, PFE_ESTIMATOR_OLS);
  CHECK(cfg.se == PFE_SE_HC);
  cfg.se = PFE_SE_CLUSTER;  // cluster se needs a grouped estimator
  pfe_estimate* e = nullptr;
  CHECK(pfe_estimate_run(p, &cfg, &e) == PFE_ERROR_USAGE);

  pfe_estimate_config gfe;
  pfe_estimate_config_init(&gfe, PFE_ESTIMATOR_GFE);
  CHECK(gfe.se == PFE_SE_CLUSTER);
  CHECK(gfe.retained_factors == 2);
  gfe.se = PFE_SE_HC;  // and hc needs a factor estimator
  CHECK(pfe_estimate_run(p, &gfe, &e) == PFE_ERROR_USAGE);

  pfe_estimate_config split;
  pfe_estimate_config_init(&split, PFE_ESTIMATOR_GFE_SPLIT);
  split.se = PFE_SE_BOOTSTRAP;  // bootstrap is wired to the plain grouped fit
  CHECK(pfe_estimate_run(p, &split, &e) == PFE_ERROR_USAGE);

  // a domain failure surfaces as such: 20 factors on a 16x16 panel
  pfe_estimate_config big;
  pfe_estimate_config_init(&big, PFE_ESTIMATOR_LS);
  CHECK(pfe_estimate_run(p, &big, &e) == PFE_ERROR_DOMAIN);
  CHECK(e == nullptr);

  pfe_panel_free(p);
}

TEST_CASE("grouped estimation with cluster and bootstrap errors") {
  pfe_sim_config sim;
  pfe_sim_config_init(&sim);
  sim.n_units = 20;
  sim.n_periods = 20;
  sim.seed = 13;
  pfe_panel* p = nullptr;
  REQUIRE(pfe_panel_simulate(&sim, 1, &p) == PFE_OK);

  pfe_estimate_config cfg;
  pfe_estimate_config_init(&cfg, PFE_ESTIMATOR_GFE);
  cfg.factors = 4;
  cfg.seed = 77;
  pfe_estimate* e = nullptr;
  REQUIRE(pfe_estimate_run(p, &cfg, &e) == PFE_OK);
  CHECK(std::string(pfe_estimate_tag(e)) == "GFE");

  bool saw_groups = false;
  for (int i = 0; i < pfe_estimate_n_metadata(e); ++i)
    if (std::string(pfe_estimate_metadata_name(e, i)) == "unit_groups") {
      saw_groups = true;
      CHECK(pfe_estimate_metadata_value(e, i) >= 7.0);  // pairs/triples of 20
      CHECK(pfe_estimate_metadata_value(e, i) <= 10.0);
    }
  CHECK(saw_groups);
  pfe_estimate_free(e);

  cfg.se = PFE_SE_BOOTSTRAP;
  cfg.bootstrap_reps = 12;
  cfg.threads = 2;
  e = nullptr;
  REQUIRE(pfe_estimate_run(p, &cfg, &e) == PFE_OK);
  CHECK(pfe_estimate_has_se(e) == 1);
  pfe_estimate_free(e);

  pfe_panel_free(p);
}

TEST_CASE("jackknifed estimate carries the tag suffix") {
  pfe_sim_config sim;
  pfe_sim_config_init(&sim);
  sim.n_units = 18;
  sim.n_periods = 18;
  sim.seed = 6;
  pfe_panel* p = nullptr;
  REQUIRE(pfe_panel_simulate(&sim, 0, &p) == PFE_OK);

  pfe_estimate_config cfg;
  pfe_estimate_config_init(&cfg, PFE_ESTIMATOR_LS);
  cfg.factors = 2;
  cfg.jackknife = 1;
  pfe_estimate* e = nullptr;
  REQUIRE(pfe_estimate_run(p, &cfg, &e) == PFE_OK);
  CHECK(std::string(pfe_estimate_tag(e)) == "LS_JK");
  pfe_estimate_free(e);
  pfe_panel_free(p);
}

TEST_CASE("benchmark interface round trip") {
  pfe_mc_config cfg;
  pfe_mc_config_init(&cfg);
  CHECK(cfg.reps == 1000);
  CHECK(cfg.sim.n_units == 100);
  cfg.sim.n_units = 14;
  cfg.sim.n_periods = 14;
  cfg.sim.seed = 3;
  cfg.reps = 3;
  cfg.estimators = "ols,ls2";
  cfg.threads = 2;

  pfe_mc_report* r = nullptr;
  REQUIRE(pfe_mc_run(&cfg, &r) == PFE_OK);
  REQUIRE(pfe_mc_report_rows(r) == 2);
  CHECK(std::string(pfe_mc_report_label(r, 0)) == "ols");
  CHECK(std::string(pfe_mc_report_label(r, 1)) == "ls2");
  CHECK(std::string(pfe_mc_report_label(r, 2)).empty());
  CHECK(std::isfinite(pfe_mc_report_stat(r, 0, PFE_MC_MEAN_BIAS)));
  CHECK(pfe_mc_report_stat(r, 0, PFE_MC_N_FAIL) == 0.0);
  CHECK(std::string(pfe_mc_report_config_echo(r)).find("n=14") !=
        std::string::npos);
  CHECK(std::string(pfe_mc_report_table(r)).find("ls2") != std::string::npos);

  TempFile csv("mc.csv");
  REQUIRE(pfe_mc_report_write_csv(r, csv.path.c_str()) == PFE_OK);
  std::ifstream in(csv.path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.rfind("schema,1\n", 0) == 0);
  pfe_mc_report_free(r);

  cfg.estimators = "nonsense";
  CHECK(pfe_mc_run(&cfg, &r) == PFE_ERROR_DOMAIN);
}
