#include "qtb/fitting.hpp"

#include <cmath>
#include <vector>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

Eigen::MatrixXd numeric_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residuals,
    const Eigen::VectorXd& params, const Eigen::VectorXd& r0, double rel_step) {
  const int n = static_cast<int>(r0.size());
  const int p = static_cast<int>(params.size());
  Eigen::MatrixXd jac(n, p);
  Eigen::VectorXd pp = params;
  Eigen::VectorXd r1(n);
  for (int j = 0; j < p; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(params[j]));
    pp[j] = params[j] + h;
    residuals(pp, r1);
    jac.col(j) = (r1 - r0) / h;
    pp[j] = params[j];
  }
  return jac;
}

}  // namespace

FitSummary levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd& params, int n_residuals, Eigen::MatrixXd* covariance,
    const FitOptions& options) {
  const int p = static_cast<int>(params.size());
  Eigen::VectorXd r(n_residuals), r_trial(n_residuals);
  residuals(params, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  FitSummary summary;
  bool converged = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    summary.iterations = iter;
    Eigen::MatrixXd jac = numeric_jacobian(residuals, params, r, options.jacobian_step);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * r;

    bool step_taken = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
      Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      Eigen::VectorXd trial = params + delta;
      residuals(trial, r_trial);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        double max_rel = 0.0;
        for (int j = 0; j < p; ++j) {
          max_rel = std::max(max_rel, std::abs(delta[j]) / std::max(1.0, std::abs(params[j])));
        }
        params = trial;
        r = r_trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        step_taken = true;
        if (max_rel < options.param_tol) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (converged || !step_taken) {
      converged = converged || !step_taken;  // stuck at a minimum counts as done
      break;
    }
  }

  if (!converged) {
    throw FitError("levenberg_marquardt: no convergence within iteration cap",
                   std::vector<double>(params.data(), params.data() + p));
  }

  summary.converged = true;
  summary.residual_rms = std::sqrt(cost / n_residuals);
  if (covariance != nullptr) {
    residuals(params, r);
    Eigen::MatrixXd jac = numeric_jacobian(residuals, params, r, options.jacobian_step);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof = std::max(1, n_residuals - p);
    *covariance = jtj.completeOrthogonalDecomposition().pseudoInverse() * (cost / dof);
  }
  return summary;
}

Eigen::VectorXd linear_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                     Eigen::MatrixXd* covariance) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw DegenerateDataError("linear least squares: rank-deficient design matrix");
  }
  Eigen::VectorXd theta = qr.solve(y);
  if (covariance != nullptr) {
    const double rss = (design * theta - y).squaredNorm();
    const double dof = std::max<double>(1.0, design.rows() - design.cols());
    *covariance = (design.transpose() * design).inverse() * (rss / dof);
  }
  return theta;
}

Eigen::VectorXd linear_least_squares_known_errors(const Eigen::MatrixXd& design,
                                                  const Eigen::VectorXd& y,
                                                  const Eigen::VectorXd& variances,
                                                  Eigen::MatrixXd* covariance) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw DegenerateDataError("linear least squares: rank-deficient design matrix");
  }
  Eigen::VectorXd theta = qr.solve(y);
  if (covariance != nullptr) {
    Eigen::MatrixXd xtx_inv = (design.transpose() * design).inverse();
    Eigen::MatrixXd mid = design.transpose() * variances.asDiagonal() * design;
    *covariance = xtx_inv * mid * xtx_inv;
  }
  return theta;
}

}  // namespace qtb
