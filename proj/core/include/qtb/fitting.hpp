#pragma once

#include <Eigen/Dense>
#include <functional>

namespace qtb {

struct FitOptions {
  int max_iterations = 200;
  double param_tol = 1e-9;  // converged when max relative step < this
  double jacobian_step = 1e-7;
};

struct FitSummary {
  bool converged = false;
  int iterations = 0;
  double residual_rms = 0.0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) least squares with a numeric
/// forward-difference Jacobian. `residuals(p, r)` fills r with the residual
/// vector at parameters p. On return `params` holds the best parameters seen.
/// If `covariance` is non-null it receives (J^T J)^-1 * RSS/(n-p).
///
/// Throws FitError (carrying best-so-far parameters) on non-convergence.
FitSummary levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd& params, int n_residuals, Eigen::MatrixXd* covariance = nullptr,
    const FitOptions& options = {});

/// Ordinary linear least squares y ~ X theta. Returns theta; if `covariance`
/// is non-null it receives (X^T X)^-1 * RSS/(n-p) (residual-based errors).
/// Throws DegenerateDataError when X is rank deficient.
Eigen::VectorXd linear_least_squares(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y,
                                     Eigen::MatrixXd* covariance = nullptr);

/// Linear least squares with known per-point variances: parameter covariance
/// is propagated from `variances` instead of residuals.
Eigen::VectorXd linear_least_squares_known_errors(const Eigen::MatrixXd& design,
                                                  const Eigen::VectorXd& y,
                                                  const Eigen::VectorXd& variances,
                                                  Eigen::MatrixXd* covariance = nullptr);

}  // namespace qtb
