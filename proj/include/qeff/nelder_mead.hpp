#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace qeff {

// Downhill-simplex minimizer with the standard reflection/expansion/
// contraction/shrink coefficients (1, 2, 0.5, 0.5). Convergence is declared
// when the spread f(worst) - f(best) of the simplex drops below spread_tol.
struct NelderMeadOptions {
  int max_evals = 2000;
  double spread_tol = 1e-10;
};

struct NelderMeadEval {
  Eigen::VectorXd x;
  double fx = 0.0;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<NelderMeadEval> history;  // every evaluation, in call order
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             const NelderMeadOptions& opts = {});

}  // namespace qeff
