#include "panelfe/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "panelfe/grouped_fe.hpp"
#include "panelfe/inference.hpp"
#include "panelfe/parallel.hpp"
#include "panelfe/rng.hpp"
#include "panelfe/split_sample.hpp"

namespace panelfe {

double kernel_h(double a, double b, double theta, KernelSign sign) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  const double d = a - b;
  const double expo = d * d / (theta * theta);
  const double scale = 1.0 / (std::sqrt(2.0 * M_PI) * theta);
  return scale * std::exp(sign == KernelSign::Negative ? -expo : expo);
}

PanelData generate_panel(const SimConfig& cfg, std::uint64_t replication) {
  if (cfg.n < 1 || cfg.t < 1) throw DomainError("need at least one unit and one period");
  if (!(cfg.theta > 0.0)) throw DomainError("theta must be positive");

  RngStream rng(cfg.seed, RngPurpose::Panel, replication);
  Eigen::VectorXd alpha(cfg.n), gamma(cfg.t);
  for (int i = 0; i < cfg.n; ++i) alpha[i] = rng.normal();
  for (int j = 0; j < cfg.t; ++j) gamma[j] = rng.normal();
  Eigen::MatrixXd eps(cfg.n, cfg.t), mu(cfg.n, cfg.t);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.t; ++j) eps(i, j) = rng.normal();
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.t; ++j) mu(i, j) = rng.normal();

  PanelData panel;
  panel.n_units = cfg.n;
  panel.n_periods = cfg.t;
  Eigen::MatrixXd low_rank(cfg.n, cfg.t);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.t; ++j)
      low_rank(i, j) = cfg.gamma_scale * kernel_h(alpha[i], gamma[j], cfg.theta, cfg.kernel_sign);
  panel.x.push_back(low_rank + cfg.mu_scale * mu);
  panel.y = cfg.beta0 * panel.x[0] + low_rank + cfg.eps_scale * eps;
  panel.gamma_true = std::move(low_rank);
  panel.beta_true = Eigen::VectorXd::Constant(1, cfg.beta0);
  panel.unit_labels.reserve(static_cast<size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) panel.unit_labels.push_back(std::to_string(i + 1));
  panel.time_labels.reserve(static_cast<size_t>(cfg.t));
  for (int j = 0; j < cfg.t; ++j) panel.time_labels.push_back(std::to_string(j + 1));
  panel.validate();
  return panel;
}

ErrorDecomposition decompose_error(const GroupedFEEstimate& est, const PanelData& panel) {
  panel.validate();
  if (!panel.gamma_true || !panel.beta_true)
    throw DomainError("error decomposition needs simulation truth on the panel");
  const int k_count = panel.n_regressors();

  Eigen::MatrixXd eps = panel.y - *panel.gamma_true;
  for (int k = 0; k < k_count; ++k)
    eps.noalias() -= (*panel.beta_true)[k] * panel.x[static_cast<size_t>(k)];
  const Eigen::MatrixXd gamma_tilde =
      project_within(*panel.gamma_true, est.unit_grouping, est.time_grouping);

  Eigen::MatrixXd a(k_count, k_count);
  Eigen::VectorXd b_eps(k_count), b_gamma(k_count);
  for (int k = 0; k < k_count; ++k) {
    for (int l = k; l < k_count; ++l) {
      a(k, l) = (est.x_tilde[static_cast<size_t>(k)].array() *
                 est.x_tilde[static_cast<size_t>(l)].array())
                    .sum();
      a(l, k) = a(k, l);
    }
    b_eps[k] = (est.x_tilde[static_cast<size_t>(k)].array() * eps.array()).sum();
    b_gamma[k] = (est.x_tilde[static_cast<size_t>(k)].array() * gamma_tilde.array()).sum();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularDesignError("projected regressor cross-product matrix is singular");
  return {lu.solve(b_eps), lu.solve(b_gamma)};
}

std::string EstimatorSpec::label() const {
  std::string base;
  switch (kind) {
    case EstimatorTag::OLS: base = "ols"; break;
    case EstimatorTag::LS: base = "ls" + std::to_string(r); break;
    case EstimatorTag::GFE: base = "gfe"; break;
    case EstimatorTag::GFE_SPLIT: base = "gfe-split"; break;
  }
  return jackknife ? base + "-jk" : base;
}

EstimatorSpec EstimatorSpec::parse(const std::string& label) {
  std::string s = label;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  EstimatorSpec spec;
  if (s.size() > 3 && s.substr(s.size() - 3) == "-jk") {
    spec.jackknife = true;
    s = s.substr(0, s.size() - 3);
  }
  if (s == "ols") {
    spec.kind = EstimatorTag::OLS;
    spec.r = 0;
  } else if (s == "gfe") {
    spec.kind = EstimatorTag::GFE;
  } else if (s == "gfe-split") {
    spec.kind = EstimatorTag::GFE_SPLIT;
  } else if (s.size() > 2 && s.substr(0, 2) == "ls") {
    spec.kind = EstimatorTag::LS;
    char* end = nullptr;
    const long r = std::strtol(s.c_str() + 2, &end, 10);
    if (end == nullptr || *end != '\0' || r < 1)
      throw DomainError("cannot parse estimator label \"" + label + "\"");
    spec.r = static_cast<int>(r);
  } else {
    throw DomainError("cannot parse estimator label \"" + label + "\"");
  }
  return spec;
}

std::vector<EstimatorSpec> EstimatorSpec::parse_list(const std::string& csv) {
  std::vector<EstimatorSpec> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse(item));
  }
  if (out.empty()) throw DomainError("empty estimator list");
  return out;
}

std::vector<EstimatorSpec> EstimatorSpec::default_set() {
  return parse_list("ls5,ls20,ls50,ls5-jk,ls20-jk,ls50-jk,gfe,gfe-jk,gfe-split");
}

namespace {

/* Sub-sample slices shared by the jackknife halves and the proxy blocks;
 * fits are cached per (slice, factor count) so the bias-corrected rows
 * and the split estimator reuse the plain rows' work. */
enum class Slice { Full, UnitsFirst, UnitsSecond, PeriodsFirst, PeriodsSecond };

struct RepWorkspace {
  const PanelData& panel;
  LsConfig ls;
  std::map<Slice, PanelData> panels;
  std::map<std::pair<Slice, int>, FactorEstimate> fits;

  RepWorkspace(const PanelData& p, const LsConfig& cfg, std::uint64_t seed)
      : panel(p), ls(cfg) {
    ls.seed = seed;
  }

  const PanelData& slice(Slice s) {
    if (s == Slice::Full) return panel;
    auto it = panels.find(s);
    if (it != panels.end()) return it->second;
    const int n = panel.n_units, t = panel.n_periods;
    PanelData sub;
    switch (s) {
      case Slice::UnitsFirst: sub = panel.subpanel(0, n / 2, 0, t); break;
      case Slice::UnitsSecond: sub = panel.subpanel(n / 2, n, 0, t); break;
      case Slice::PeriodsFirst: sub = panel.subpanel(0, n, 0, t / 2); break;
      case Slice::PeriodsSecond: sub = panel.subpanel(0, n, t / 2, t); break;
      default: break;
    }
    return panels.emplace(s, std::move(sub)).first->second;
  }

  const FactorEstimate& fit(Slice s, int r) {
    const auto key = std::make_pair(s, r);
    auto it = fits.find(key);
    if (it != fits.end()) return it->second;
    LsConfig cfg = ls;
    cfg.r = r;
    FactorEstimate est = estimate_ls(slice(s), cfg);
    return fits.emplace(key, std::move(est)).first->second;
  }

  GroupedFEEstimate gfe(Slice s, int r_initial, int r_star) {
    Grouping ug, tg;
    groups_from_factors(fit(s, r_initial), r_star, ug, tg);
    return estimate_gfe_given_groups(slice(s), ug, tg);
  }

  SplitEstimate gfe_split(int r_initial, int r_star) {
    /* the four proxy blocks coincide with the period and unit halves */
    SplitEstimate est;
    est.scheme = make_blocks(panel.n_units, panel.n_periods);
    std::array<ProxyFactors, 4> proxies;
    const Slice order[4] = {Slice::PeriodsFirst, Slice::PeriodsSecond,
                            Slice::UnitsFirst, Slice::UnitsSecond};
    for (int p = 0; p < 4; ++p) {
      const FactorEstimate& f = fit(order[p], r_initial);
      proxies[static_cast<size_t>(p)].block_id = p + 1;
      proxies[static_cast<size_t>(p)].block = est.scheme.proxy[static_cast<size_t>(p)];
      proxies[static_cast<size_t>(p)].lambda = f.lambda_hat;
      proxies[static_cast<size_t>(p)].f = f.f_hat;
    }
    return estimate_gfe_split_with_proxies(panel, est.scheme, proxies, r_star);
  }
};

struct CellResult {
  double bias = 0.0;
  double se = 0.0;
  bool ok = false;
};

CellResult run_spec(RepWorkspace& ws, const EstimatorSpec& spec, double beta0) {
  CellResult cell;
  const auto finish = [&](double beta, double se) {
    cell.bias = beta - beta0;
    cell.se = se;
    cell.ok = true;
  };
  switch (spec.kind) {
    case EstimatorTag::OLS:
    case EstimatorTag::LS: {
      const int r = spec.kind == EstimatorTag::OLS ? 0 : spec.r;
      const FactorEstimate& full = ws.fit(Slice::Full, r);
      const double se = hc_se(full, ws.panel)[0];
      if (!spec.jackknife) {
        finish(full.beta_hat[0], se);
      } else {
        const Eigen::VectorXd combined = jackknife_combine(
            full.beta_hat, ws.fit(Slice::UnitsFirst, r).beta_hat,
            ws.fit(Slice::UnitsSecond, r).beta_hat,
            ws.fit(Slice::PeriodsFirst, r).beta_hat,
            ws.fit(Slice::PeriodsSecond, r).beta_hat);
        finish(combined[0], se);
      }
      break;
    }
    case EstimatorTag::GFE: {
      const GroupedFEEstimate full = ws.gfe(Slice::Full, spec.r_initial, spec.r_star);
      const double se = cluster_se(full, ws.panel)[0];
      if (!spec.jackknife) {
        finish(full.beta_hat[0], se);
      } else {
        const Eigen::VectorXd combined = jackknife_combine(
            full.beta_hat,
            ws.gfe(Slice::UnitsFirst, spec.r_initial, spec.r_star).beta_hat,
            ws.gfe(Slice::UnitsSecond, spec.r_initial, spec.r_star).beta_hat,
            ws.gfe(Slice::PeriodsFirst, spec.r_initial, spec.r_star).beta_hat,
            ws.gfe(Slice::PeriodsSecond, spec.r_initial, spec.r_star).beta_hat);
        finish(combined[0], se);
      }
      break;
    }
    case EstimatorTag::GFE_SPLIT: {
      const SplitEstimate full = ws.gfe_split(spec.r_initial, spec.r_star);
      const double se = cluster_se(full, ws.panel)[0];
      if (!spec.jackknife) {
        finish(full.beta_hat[0], se);
      } else {
        const auto run = [&](const PanelData& p) {
          return estimate_gfe_split(p, spec.r_initial, spec.r_star, ws.ls).beta_hat;
        };
        const int n = ws.panel.n_units, t = ws.panel.n_periods;
        const Eigen::VectorXd combined = jackknife_combine(
            full.beta_hat, run(ws.panel.subpanel(0, n / 2, 0, t)),
            run(ws.panel.subpanel(n / 2, n, 0, t)),
            run(ws.panel.subpanel(0, n, 0, t / 2)),
            run(ws.panel.subpanel(0, n, t / 2, t)));
        finish(combined[0], se);
      }
      break;
    }
  }
  return cell;
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string MCReport::to_csv() const {
  std::ostringstream out;
  out << "schema,1\n";
  out << "config," << config_echo << "\n";
  out << "estimator,mean_bias,std_dev,mean_se,coverage,n_fail\n";
  for (const auto& row : rows)
    out << row.label << ',' << format_g(row.mean_bias) << ',' << format_g(row.std_dev)
        << ',' << format_g(row.mean_se) << ',' << format_g(row.coverage) << ','
        << row.n_fail << "\n";
  return out.str();
}

std::string MCReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s %12s %12s %12s %10s %7s\n", "estimator",
                "mean_bias", "std_dev", "mean_se", "coverage", "n_fail");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-14s %12.4f %12.4f %12.4f %10.2f %7d\n",
                  row.label.c_str(), row.mean_bias, row.std_dev, row.mean_se,
                  row.coverage, row.n_fail);
    out << buf;
  }
  return out.str();
}

MCReport run_monte_carlo(const MCConfig& cfg) {
  if (cfg.reps < 1) throw DomainError("need at least one replication");
  const std::vector<EstimatorSpec> specs =
      cfg.estimators.empty() ? EstimatorSpec::default_set() : cfg.estimators;
  const int n_specs = static_cast<int>(specs.size());

  std::vector<std::vector<CellResult>> cells(
      static_cast<size_t>(cfg.reps),
      std::vector<CellResult>(static_cast<size_t>(n_specs)));

  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    const PanelData panel = generate_panel(cfg.sim, static_cast<std::uint64_t>(rep));
    const std::uint64_t ls_seed =
        RngStream(cfg.sim.seed, RngPurpose::LsSeed, static_cast<std::uint64_t>(rep))
            .next_u64();
    RepWorkspace ws(panel, cfg.ls, ls_seed);
    for (int s = 0; s < n_specs; ++s) {
      try {
        cells[static_cast<size_t>(rep)][static_cast<size_t>(s)] =
            run_spec(ws, specs[static_cast<size_t>(s)], cfg.sim.beta0);
      } catch (const Error&) {
        /* failed fit: excluded from the row's statistics, counted */
      }
    }
  });

  MCReport report;
  report.reps = cfg.reps;
  report.seed = cfg.sim.seed;
  {
    std::ostringstream echo;
    echo << "n=" << cfg.sim.n << ";t=" << cfg.sim.t << ";beta0=" << format_g(cfg.sim.beta0)
         << ";theta=" << format_g(cfg.sim.theta) << ";kernel_sign="
         << (cfg.sim.kernel_sign == KernelSign::Negative ? "negative" : "positive")
         << ";seed=" << cfg.sim.seed << ";reps=" << cfg.reps << ";estimators=";
    for (int s = 0; s < n_specs; ++s)
      echo << (s ? "," : "") << specs[static_cast<size_t>(s)].label();
    echo << ";n_starts=" << cfg.ls.n_starts << ";tol=" << format_g(cfg.ls.tol)
         << ";max_iter=" << cfg.ls.max_iter << ";threads="
         << (cfg.threads > 0 ? std::to_string(cfg.threads) : std::string("auto"));
    report.config_echo = echo.str();
  }

  for (int s = 0; s < n_specs; ++s) {
    MCReport::Row row;
    row.label = specs[static_cast<size_t>(s)].label();
    double sum = 0.0, sum_se = 0.0;
    int n_ok = 0, covered = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const CellResult& c = cells[static_cast<size_t>(rep)][static_cast<size_t>(s)];
      if (!c.ok) continue;
      ++n_ok;
      sum += c.bias;
      sum_se += c.se;
      if (std::abs(c.bias) <= 1.96 * c.se) ++covered;
    }
    row.n_fail = cfg.reps - n_ok;
    if (n_ok > 0) {
      row.mean_bias = sum / n_ok;
      row.mean_se = sum_se / n_ok;
      row.coverage = static_cast<double>(covered) / n_ok;
      double ss = 0.0;
      for (int rep = 0; rep < cfg.reps; ++rep) {
        const CellResult& c = cells[static_cast<size_t>(rep)][static_cast<size_t>(s)];
        if (c.ok) ss += (c.bias - row.mean_bias) * (c.bias - row.mean_bias);
      }
      row.std_dev = n_ok > 1 ? std::sqrt(ss / (n_ok - 1)) : std::nan("");
    } else {
      row.mean_bias = row.std_dev = row.mean_se = row.coverage = std::nan("");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace panelfe
