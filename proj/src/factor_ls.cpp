#include "panelfe/factor_ls.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "panelfe/rng.hpp"

namespace panelfe {

EstimateReport FactorEstimate::report() const {
  EstimateReport rep;
  rep.beta_hat = beta_hat;
  rep.tag = r == 0 ? EstimatorTag::OLS : EstimatorTag::LS;
  rep.metadata["r"] = r;
  rep.metadata["objective"] = objective;
  rep.metadata["iterations"] = iterations;
  rep.metadata["converged"] = converged ? 1.0 : 0.0;
  return rep;
}

namespace {

/* Unit columns orthogonal to the (orthonormal) columns of basis, taken
 * from the trailing columns of its full Householder Q. */
Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& basis, int count) {
  const int dim = static_cast<int>(basis.rows());
  const int have = static_cast<int>(basis.cols());
  if (have == 0) return Eigen::MatrixXd::Identity(dim, count);
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ();
  return q.middleCols(have, count);
}

}  // namespace

void pca_step(const Eigen::MatrixXd& residual, int r, Eigen::MatrixXd& lambda,
              Eigen::MatrixXd& f) {
  const int n = static_cast<int>(residual.rows());
  const int t = static_cast<int>(residual.cols());
  if (n < 1 || t < 1) throw DomainError("empty residual matrix");
  if (r < 0 || r > std::min(n, t))
    throw DomainError("factor count must lie in [0, min(N,T)]");
  if (r == 0) {
    lambda.resize(n, 0);
    f.resize(t, 0);
    return;
  }

  const double sqrt_t = std::sqrt(static_cast<double>(t));

  /* Eigendecompose the smaller Gram matrix; eigenvalues sigma^2 come back
   * ascending, so the leading directions are the trailing columns. */
  if (t <= n) {
    Eigen::MatrixXd gram(t, t);
    gram.noalias() = residual.transpose() * residual;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::MatrixXd v(t, r);
    for (int l = 0; l < r; ++l) v.col(l) = eig.eigenvectors().col(t - 1 - l);
    f = sqrt_t * v;
    lambda.noalias() = residual * v / sqrt_t;
  } else {
    Eigen::MatrixXd gram(n, n);
    gram.noalias() = residual * residual.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::MatrixXd u(n, r);
    Eigen::VectorXd sigma(r);
    for (int l = 0; l < r; ++l) {
      u.col(l) = eig.eigenvectors().col(n - 1 - l);
      sigma[l] = std::sqrt(std::max(eig.eigenvalues()[n - 1 - l], 0.0));
    }
    const double tiny =
        std::max(sigma[0], 1.0) * static_cast<double>(std::max(n, t)) *
        std::numeric_limits<double>::epsilon();
    lambda = u * sigma.asDiagonal() / sqrt_t;
    f.resize(t, r);
    int good = 0;
    for (int l = 0; l < r; ++l) {
      if (sigma[l] > tiny) {
        f.col(good) = residual.transpose() * u.col(l) * (sqrt_t / sigma[l]);
        ++good;
      }
    }
    if (good < r) {
      /* Exactly rank-deficient residual: the dropped directions carry zero
       * loadings, any orthonormal completion works for their factors. */
      const Eigen::MatrixXd fill =
          orthonormal_completion(f.leftCols(good) / sqrt_t, r - good);
      lambda.rightCols(r - good).setZero();
      f.rightCols(r - good) = sqrt_t * fill;
    }
  }
}

namespace {

Eigen::MatrixXd cross_products(const PanelData& panel) {
  const int k_count = panel.n_regressors();
  Eigen::MatrixXd a(k_count, k_count);
  for (int k = 0; k < k_count; ++k)
    for (int l = k; l < k_count; ++l) {
      a(k, l) = (panel.x[static_cast<size_t>(k)].array() *
                 panel.x[static_cast<size_t>(l)].array())
                    .sum();
      a(l, k) = a(k, l);
    }
  return a;
}

Eigen::FullPivLU<Eigen::MatrixXd> design_solver(const PanelData& panel) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cross_products(panel));
  if (!lu.isInvertible())
    throw SingularDesignError("regressor cross-product matrix is singular");
  return lu;
}

Eigen::VectorXd solve_beta(const PanelData& panel,
                           const Eigen::FullPivLU<Eigen::MatrixXd>& lu,
                           const Eigen::MatrixXd& target) {
  const int k_count = panel.n_regressors();
  Eigen::VectorXd b(k_count);
  for (int k = 0; k < k_count; ++k)
    b[k] = (panel.x[static_cast<size_t>(k)].array() * target.array()).sum();
  return lu.solve(b);
}

}  // namespace

Eigen::VectorXd ols_step(const PanelData& panel, const Eigen::MatrixXd& lambda,
                         const Eigen::MatrixXd& f) {
  panel.validate();
  if (panel.n_regressors() < 1) throw DomainError("no regressors");
  const auto lu = design_solver(panel);
  if (lambda.cols() == 0) return solve_beta(panel, lu, panel.y);
  Eigen::MatrixXd target = panel.y;
  target.noalias() -= lambda * f.transpose();
  return solve_beta(panel, lu, target);
}

FactorEstimate estimate_ls(const PanelData& panel, const LsConfig& cfg, LsTrace* trace) {
  panel.validate();
  const int k_count = panel.n_regressors();
  if (k_count < 1) throw DomainError("no regressors");
  if (cfg.r < 0 || cfg.r > std::min(panel.n_units, panel.n_periods) - 1)
    throw DomainError("factor count must lie in [0, min(N,T)-1]");
  if (cfg.n_starts < 1) throw DomainError("need at least one starting value");
  if (!(cfg.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (cfg.max_iter < 1) throw DomainError("max_iter must be positive");

  const auto lu = design_solver(panel);
  const Eigen::VectorXd beta_pooled = solve_beta(panel, lu, panel.y);

  if (trace) {
    trace->objectives.assign(static_cast<size_t>(cfg.n_starts), {});
    trace->final_objectives.assign(static_cast<size_t>(cfg.n_starts), 0.0);
    trace->selected_start = -1;
  }

  const auto residual_from = [&](const Eigen::VectorXd& beta) {
    Eigen::MatrixXd e = panel.y;
    for (int k = 0; k < k_count; ++k) e.noalias() -= beta[k] * panel.x[static_cast<size_t>(k)];
    return e;
  };

  FactorEstimate best;
  bool have_best = false;
  int best_start = -1;

  Eigen::MatrixXd lambda, f, lowrank, e;
  for (int start = 0; start < cfg.n_starts; ++start) {
    Eigen::VectorXd beta = beta_pooled;
    if (start > 0) {
      const double scale = 0.5 * beta_pooled.lpNorm<Eigen::Infinity>() + 0.5;
      RngStream rng(cfg.seed, RngPurpose::LsStart, static_cast<std::uint64_t>(start));
      for (int k = 0; k < k_count; ++k) beta[k] += rng.uniform(-scale, scale);
    }

    e = residual_from(beta);
    double obj_prev = std::numeric_limits<double>::infinity();
    double obj = obj_prev;
    bool converged = false;
    int iter = 0;
    while (iter < cfg.max_iter) {
      ++iter;
      pca_step(e, cfg.r, lambda, f);
      if (cfg.r > 0) {
        lowrank.noalias() = lambda * f.transpose();
        beta = solve_beta(panel, lu, panel.y - lowrank);
      } else {
        beta = beta_pooled;
      }
      e = residual_from(beta);
      obj = cfg.r > 0 ? (e - lowrank).squaredNorm() : e.squaredNorm();
      if (trace) trace->objectives[static_cast<size_t>(start)].push_back(obj);
      if (std::isfinite(obj_prev)) {
        if (obj_prev <= 0.0 || (obj_prev - obj) / obj_prev < cfg.tol) {
          converged = true;
          break;
        }
      }
      obj_prev = obj;
    }

    if (trace) trace->final_objectives[static_cast<size_t>(start)] = obj;
    if (!have_best || obj < best.objective) {
      have_best = true;
      best_start = start;
      best.beta_hat = beta;
      best.lambda_hat = lambda;
      best.f_hat = f;
      best.objective = obj;
      best.iterations = iter;
      best.converged = converged;
      best.r = cfg.r;
    }
  }
  if (trace) trace->selected_start = best_start;
  return best;
}

}  // namespace panelfe
