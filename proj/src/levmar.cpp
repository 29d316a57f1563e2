#include "qeff/levmar.hpp"

#include "qeff/types.hpp"

#include <cmath>
#include <limits>

namespace qeff {

namespace {

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd x, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper) {
  if (lower.size() == x.size()) x = x.cwiseMax(lower);
  if (upper.size() == x.size()) x = x.cwiseMin(upper);
  return x;
}

}  // namespace

LevMarResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                                 const LevMarOptions& opts, const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw InvalidInput("levenberg_marquardt needs at least one parameter");
  if (lower.size() != 0 && lower.size() != n) throw InvalidInput("lower bound size mismatch");
  if (upper.size() != 0 && upper.size() != n) throw InvalidInput("upper bound size mismatch");

  LevMarResult res;
  Eigen::VectorXd x = clamp_to_bounds(x0, lower, upper);
  Eigen::VectorXd r = f(x);
  if (!r.allFinite()) throw InvalidInput("residuals are not finite at the starting point");
  if (r.size() <= n) throw InvalidInput("need more residuals than parameters");
  double chi2 = r.squaredNorm();
  double lambda = opts.lambda0;

  const auto jacobian = [&](const Eigen::VectorXd& at) {
    Eigen::MatrixXd jac(r.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = std::max(1e-7 * std::abs(at(j)), 1e-10);
      Eigen::VectorXd xp = at;
      Eigen::VectorXd xm = at;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return jac;
  };

  bool stalled = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::MatrixXd jac = jacobian(x);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      const Eigen::VectorXd xt = clamp_to_bounds(x + step, lower, upper);
      const Eigen::VectorXd rt = f(xt);
      const double chi2t = rt.allFinite() ? rt.squaredNorm() : std::numeric_limits<double>::max();
      if (chi2t < chi2) {
        const double df = chi2 - chi2t;
        const double dx = (xt - x).norm();
        x = xt;
        r = rt;
        chi2 = chi2t;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (df <= opts.ftol * std::max(chi2, 1e-300) || dx <= opts.xtol * std::max(x.norm(), 1e-300)) {
          res.converged = true;
        }
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!improved) {
      // No decreasing step exists at any damping: a (possibly exact) minimum.
      stalled = true;
      break;
    }
    if (res.converged) break;
  }
  if (stalled) res.converged = true;

  res.x = x;
  res.chi2 = chi2;
  /*
   * Covariance = (J^T J)^{-1}. Parameter scales can differ by many orders of
   * magnitude, and a relative pivot test on the raw normal matrix would
   * misread that as rank deficiency, so equilibrate to unit diagonal first:
   * with D = diag(J^T J)^{-1/2}, invert D (J^T J) D and undo the scaling.
   */
  const Eigen::MatrixXd jac = jacobian(x);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  res.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  if ((jtj.diagonal().array() > 0.0).all()) {
    const Eigen::VectorXd scale = jtj.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd equilibrated = scale.asDiagonal() * jtj * scale.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(equilibrated);
    if (lu.isInvertible()) {
      res.covariance = scale.asDiagonal() * lu.inverse() * scale.asDiagonal();
    }
  }
  return res;
}

}  // namespace qeff
