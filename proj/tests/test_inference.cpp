#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "panelfe/errors.hpp"
#include "panelfe/inference.hpp"

using namespace panelfe;

namespace {

Eigen::MatrixXd randn(int n, int t, std::mt19937& gen) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(n, t);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < t; ++j) m(i, j) = dist(gen);
  return m;
}

PanelData make_panel(const Eigen::MatrixXd& y, std::vector<Eigen::MatrixXd> x) {
  PanelData p;
  p.n_units = static_cast<int>(y.rows());
  p.n_periods = static_cast<int>(y.cols());
  p.y = y;
  p.x = std::move(x);
  for (int i = 0; i < p.n_units; ++i) p.unit_labels.push_back(std::to_string(i + 1));
  for (int j = 0; j < p.n_periods; ++j) p.time_labels.push_back(std::to_string(j + 1));
  return p;
}

Grouping pair_grouping(int m) {
  std::vector<int> labels(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) labels[static_cast<size_t>(i)] = i / 2 + 1;
  if (m % 2 == 1) labels[static_cast<size_t>(m - 1)] = m / 2;  // last becomes a triple
  return Grouping::from_labels(labels);
}

}  // namespace

TEST_CASE("sandwich arithmetic on hand numbers") {
  // one regressor, omega = 4, meat = 9, dfc = 2  =>  var = 2^2 * 9 / 16
  SandwichParts parts;
  parts.omega = Eigen::MatrixXd::Constant(1, 1, 4.0);
  parts.sigma_hat = Eigen::MatrixXd::Constant(1, 1, 9.0);
  parts.dfc = 2.0;
  Eigen::VectorXd se = se_from_parts(parts);
  CHECK(se(0) == doctest::Approx(std::sqrt(4.0 * 9.0 / 16.0)).epsilon(1e-14));
}

TEST_CASE("factor-estimator variance matches a residualization oracle") {
  std::mt19937 gen(307);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 8, t = 9, r = 2;
    PanelData p = make_panel(randn(n, t, gen), {randn(n, t, gen)});
    LsConfig cfg;
    cfg.r = r;
    cfg.seed = trial;
    FactorEstimate est = estimate_ls(p, cfg);

    SandwichParts parts = hc_sandwich(est, p);
    Eigen::VectorXd se = hc_se(est, p);

    // residualize both sides with explicit projection matrices
    auto annihilator = [](const Eigen::MatrixXd& a) {
      Eigen::MatrixXd p =
          a * (a.transpose() * a)
                  .completeOrthogonalDecomposition()
                  .pseudoInverse() *
          a.transpose();
      return Eigen::MatrixXd(Eigen::MatrixXd::Identity(a.rows(), a.rows()) - p);
    };
    Eigen::MatrixXd ml = annihilator(est.lambda_hat);
    Eigen::MatrixXd mf = annihilator(est.f_hat);
    Eigen::MatrixXd xt = ml * p.x[0] * mf;
    Eigen::MatrixXd ut = ml * (p.y - est.beta_hat(0) * p.x[0]) * mf;

    double omega = xt.squaredNorm();
    double meat = (xt.array().square() * ut.array().square()).sum();
    double dfc = std::sqrt(static_cast<double>(n) * t /
                           (static_cast<double>(n - r) * (t - r)));
    CHECK(parts.omega(0, 0) == doctest::Approx(omega).epsilon(1e-9));
    CHECK(parts.sigma_hat(0, 0) == doctest::Approx(meat).epsilon(1e-8));
    CHECK(parts.dfc == doctest::Approx(dfc).epsilon(1e-14));
    CHECK(se(0) ==
          doctest::Approx(dfc * std::sqrt(meat) / omega).epsilon(1e-8));
  }
}

TEST_CASE("combination clusters index every cell consistently") {
  Grouping gu = Grouping::from_labels({1, 1, 2, 2, 2});
  Grouping gt = Grouping::from_labels({1, 1, 2, 2});
  ClusterIndex idx = ClusterIndex::combination(gu, gt, 5, 4);
  REQUIRE(idx.assignment.size() == 20);
  CHECK(idx.m_total == 4);
  std::set<int> seen;
  for (int i = 0; i < 5; ++i)
    for (int s = 0; s < 4; ++s) {
      int a = idx.assignment[static_cast<size_t>(i + s * 5)];
      CHECK(a >= 1);
      CHECK(a <= 4);
      seen.insert(a);
      // cells sharing both groups share the cluster
      int a2 = idx.assignment[static_cast<size_t>((i < 2 ? 0 : 2) + (s < 2 ? 0 : 2) * 5)];
      CHECK(a == a2);
    }
  CHECK(seen.size() == 4);
}

TEST_CASE("meat with singleton clusters collapses to the per-cell form") {
  std::mt19937 gen(311);
  int n = 6, t = 5, k = 2;
  std::vector<Eigen::MatrixXd> xt{randn(n, t, gen), randn(n, t, gen)};
  Eigen::MatrixXd u = randn(n, t, gen);
  ClusterIndex singles;
  singles.m_total = n * t;
  singles.assignment.resize(static_cast<size_t>(n * t));
  for (int c = 0; c < n * t; ++c) singles.assignment[static_cast<size_t>(c)] = c + 1;

  Eigen::MatrixXd got = cluster_meat(xt, u, singles);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < t; ++s) {
      Eigen::VectorXd score(k);
      score << xt[0](i, s) * u(i, s), xt[1](i, s) * u(i, s);
      expect += score * score.transpose();
    }
  CHECK((got - expect).norm() < 1e-12 * (1 + expect.norm()));
}

TEST_CASE("meat matches a brute-force double sum within clusters") {
  std::mt19937 gen(313);
  int n = 6, t = 6;
  std::vector<Eigen::MatrixXd> xt{randn(n, t, gen)};
  Eigen::MatrixXd u = randn(n, t, gen);
  ClusterIndex idx = ClusterIndex::combination(pair_grouping(n), pair_grouping(t), n, t);

  Eigen::MatrixXd got = cluster_meat(xt, u, idx);
  double expect = 0;
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < t; ++s)
      for (int i2 = 0; i2 < n; ++i2)
        for (int s2 = 0; s2 < t; ++s2)
          if (idx.assignment[static_cast<size_t>(i + s * n)] ==
              idx.assignment[static_cast<size_t>(i2 + s2 * n)])
            expect += xt[0](i, s) * u(i, s) * xt[0](i2, s2) * u(i2, s2);
  CHECK(got(0, 0) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("grouped-estimator variance pieces are assembled correctly") {
  std::mt19937 gen(317);
  int n = 9, t = 8;
  PanelData p = make_panel(randn(n, t, gen), {randn(n, t, gen)});
  Grouping gu = pair_grouping(n);
  Grouping gt = pair_grouping(t);
  GroupedFEEstimate est = estimate_gfe_given_groups(p, gu, gt);

  SandwichParts full = cluster_sandwich(est, p, SigmaMode::FullCluster);
  SandwichParts diag = cluster_sandwich(est, p, SigmaMode::Diagonal);

  double omega = est.x_tilde[0].squaredNorm();
  CHECK(full.omega(0, 0) == doctest::Approx(omega).epsilon(1e-12));
  CHECK(diag.omega(0, 0) == doctest::Approx(omega).epsilon(1e-12));

  double dfc = std::sqrt(static_cast<double>(n) * t /
                         (static_cast<double>(n - gu.n_groups) * (t - gt.n_groups)));
  CHECK(full.dfc == doctest::Approx(dfc).epsilon(1e-14));

  ClusterIndex idx = ClusterIndex::combination(gu, gt, n, t);
  Eigen::MatrixXd meat = cluster_meat(est.x_tilde, est.residuals, idx);
  CHECK(full.sigma_hat(0, 0) == doctest::Approx(meat(0, 0)).epsilon(1e-12));

  double diag_meat =
      (est.x_tilde[0].array().square() * est.residuals.array().square()).sum();
  CHECK(diag.sigma_hat(0, 0) == doctest::Approx(diag_meat).epsilon(1e-12));

  CHECK(cluster_se(est, p)(0) ==
        doctest::Approx(dfc * std::sqrt(meat(0, 0)) / omega).epsilon(1e-10));
}

TEST_CASE("split variance uses per-block clusters and averaged group counts") {
  std::mt19937 gen(331);
  int n = 12, t = 12;
  PanelData p = make_panel(randn(n, t, gen), {randn(n, t, gen)});
  LsConfig cfg;
  cfg.r = 2;
  cfg.seed = 23;
  SplitEstimate est = estimate_gfe_split(p, 2, 2, cfg);
  SandwichParts parts = cluster_sandwich(est, p);

  double omega = 0;
  for (int s = 0; s < 4; ++s) omega += est.x_tilde[static_cast<size_t>(s)][0].squaredNorm();
  CHECK(parts.omega(0, 0) == doctest::Approx(omega).epsilon(1e-12));

  // blockwise meat: clusters never straddle blocks
  double meat = 0;
  for (int s = 0; s < 4; ++s) {
    const Block& b = est.scheme.estimation[static_cast<size_t>(s)];
    ClusterIndex idx = ClusterIndex::combination(
        est.groupings.unit[static_cast<size_t>(s)],
        est.groupings.time[static_cast<size_t>(s)], b.n_units(), b.n_periods());
    meat += cluster_meat(est.x_tilde[static_cast<size_t>(s)],
                         est.residuals[static_cast<size_t>(s)], idx)(0, 0);
  }
  CHECK(parts.sigma_hat(0, 0) == doctest::Approx(meat).epsilon(1e-10));

  double g_eff = 0, c_eff = 0;
  for (int s = 0; s < 4; ++s) {
    g_eff += est.groupings.unit[static_cast<size_t>(s)].n_groups;
    c_eff += est.groupings.time[static_cast<size_t>(s)].n_groups;
  }
  g_eff /= 2.0;
  c_eff /= 2.0;
  double dfc = std::sqrt(static_cast<double>(n) * t /
                         ((static_cast<double>(n) - g_eff) *
                          (static_cast<double>(t) - c_eff)));
  CHECK(parts.dfc == doctest::Approx(dfc).epsilon(1e-12));
}

TEST_CASE("bootstrap of a constant estimator has zero spread") {
  std::mt19937 gen(337);
  PanelData p = make_panel(randn(8, 6, gen), {randn(8, 6, gen)});
  Grouping units = Grouping::from_labels({1, 2, 3, 4, 5, 6, 7, 8});
  EstimatorFn constant = [](const PanelData&) {
    EstimateReport r;
    r.beta_hat = Eigen::VectorXd::Constant(1, 2.5);
    return r;
  };
  Eigen::VectorXd se = bootstrap_cluster_se(constant, p, units, 40, 99);
  CHECK(se(0) == 0.0);
}

TEST_CASE("bootstrap resamples whole units and is deterministic") {
  std::mt19937 gen(347);
  PanelData p = make_panel(randn(10, 5, gen), {randn(10, 5, gen)});
  Grouping units = Grouping::from_labels({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

  // the estimator records the panels it sees: every resample must be built
  // from whole original unit rows, N of them
  EstimatorFn probe = [&p](const PanelData& resampled) {
    REQUIRE(resampled.n_units == p.n_units);
    REQUIRE(resampled.n_periods == p.n_periods);
    for (int i = 0; i < resampled.n_units; ++i) {
      bool found = false;
      for (int j = 0; j < p.n_units && !found; ++j)
        found = resampled.y.row(i) == p.y.row(j) &&
                resampled.x[0].row(i) == p.x[0].row(j);
      REQUIRE(found);
    }
    EstimateReport r;
    r.beta_hat = Eigen::VectorXd::Constant(1, resampled.y.mean());
    return r;
  };
  Eigen::VectorXd a = bootstrap_cluster_se(probe, p, units, 25, 123, 1);
  Eigen::VectorXd b = bootstrap_cluster_se(probe, p, units, 25, 123, 4);
  CHECK(a(0) == b(0));
  CHECK(a(0) > 0.0);

  Eigen::VectorXd c = bootstrap_cluster_se(probe, p, units, 25, 124, 1);
  CHECK(a(0) != c(0));
}

TEST_CASE("bootstrap tolerates a few failures but not many") {
  std::mt19937 gen(349);
  PanelData p = make_panel(randn(6, 4, gen), {randn(6, 4, gen)});
  Grouping units = Grouping::from_labels({1, 2, 3, 4, 5, 6});

  int calls = 0;
  EstimatorFn flaky = [&calls](const PanelData& q) {
    if (++calls % 20 == 0) throw DomainError("sporadic");
    EstimateReport r;
    r.beta_hat = Eigen::VectorXd::Constant(1, q.y.sum());
    return r;
  };
  CHECK_NOTHROW(bootstrap_cluster_se(flaky, p, units, 30, 7, 1));

  EstimatorFn broken = [](const PanelData&) -> EstimateReport {
    throw DomainError("always");
  };
  CHECK_THROWS_AS(bootstrap_cluster_se(broken, p, units, 30, 7, 1), BootstrapError);
}

TEST_CASE("jackknife arithmetic on scalar fits") {
  Eigen::VectorXd full = Eigen::VectorXd::Constant(1, 1.0);
  Eigen::VectorXd u1 = Eigen::VectorXd::Constant(1, 1.1);
  Eigen::VectorXd u2 = Eigen::VectorXd::Constant(1, 1.1);
  Eigen::VectorXd t1 = Eigen::VectorXd::Constant(1, 1.2);
  Eigen::VectorXd t2 = Eigen::VectorXd::Constant(1, 1.2);
  Eigen::VectorXd out = jackknife_combine(full, u1, u2, t1, t2);
  CHECK(out(0) == doctest::Approx(3.0 - 1.1 - 1.2).epsilon(1e-14));

  // all five equal: correction is the identity
  Eigen::VectorXd same = jackknife_combine(full, full, full, full, full);
  CHECK(same(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("jackknife calls the estimator on the four halves in order") {
  std::mt19937 gen(353);
  int n = 10, t = 8;
  PanelData p = make_panel(randn(n, t, gen), {randn(n, t, gen)});

  std::vector<std::pair<int, int>> dims;
  EstimatorFn recorder = [&dims](const PanelData& q) {
    dims.emplace_back(q.n_units, q.n_periods);
    EstimateReport r;
    r.beta_hat = Eigen::VectorXd::Constant(1, static_cast<double>(dims.size()));
    r.se = Eigen::VectorXd::Constant(1, 0.5);
    return r;
  };
  EstimateReport out = jackknife_correct(recorder, p);
  REQUIRE(dims.size() == 5);
  CHECK(dims[0] == std::pair<int, int>{10, 8});
  CHECK(dims[1] == std::pair<int, int>{5, 8});
  CHECK(dims[2] == std::pair<int, int>{5, 8});
  CHECK(dims[3] == std::pair<int, int>{10, 4});
  CHECK(dims[4] == std::pair<int, int>{10, 4});

  // 3*1 - (2+3)/2 - (4+5)/2
  CHECK(out.beta_hat(0) == doctest::Approx(3.0 - 2.5 - 4.5).epsilon(1e-14));
  CHECK(out.jackknifed);
  REQUIRE(out.se.has_value());
  CHECK((*out.se)(0) == 0.5);  // copied from the full fit
}

TEST_CASE("a failing half names itself in the error") {
  std::mt19937 gen(359);
  PanelData p = make_panel(randn(8, 8, gen), {randn(8, 8, gen)});
  int calls = 0;
  EstimatorFn fails_third = [&calls](const PanelData& q) -> EstimateReport {
    if (++calls == 3) throw DomainError("boom");
    EstimateReport r;
    r.beta_hat = Eigen::VectorXd::Constant(1, q.y.mean());
    return r;
  };
  try {
    jackknife_correct(fails_third, p);
    FAIL("expected JackknifeError");
  } catch (const JackknifeError& e) {
    CHECK(std::string(e.what()).find("unit") != std::string::npos);
  }
}
