#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qeff {

// Levenberg-Marquardt least squares for a weighted residual vector r(x);
// minimizes |r(x)|^2. The Jacobian is formed by central differences. Optional
// box bounds are enforced by clamping trial steps. The covariance returned is
// (J^T J)^-1 at the solution, which is the asymptotic parameter covariance
// when the residuals are scaled to unit variance.
struct LevMarOptions {
  int max_iter = 200;
  double ftol = 1e-12;   // relative chi2 improvement below which we stop
  double xtol = 1e-12;   // relative step size below which we stop
  double lambda0 = 1e-3; // initial damping
};

struct LevMarResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

LevMarResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                                 const LevMarOptions& opts = {},
                                 const Eigen::VectorXd& lower = Eigen::VectorXd(),
                                 const Eigen::VectorXd& upper = Eigen::VectorXd());

}  // namespace qeff
