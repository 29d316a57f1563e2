#include "qeff/estimation.hpp"

#include "qeff/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qeff {

namespace {

constexpr double LOG_SQRT_2PI = 0.91893853320467274178;

double log_likelihood_single(const ArrayXd& x, double mu, double sigma) {
  const ArrayXd z = (x - mu) / sigma;
  return -0.5 * z.square().sum() - static_cast<double>(x.size()) * (std::log(sigma) + LOG_SQRT_2PI);
}

}  // namespace

DoubleGaussianFit fit_double_gaussian(const ArrayXd& shots, const EmOptions& opts) {
  const Index n = shots.size();
  if (n < opts.min_shots) throw InvalidInput("too few shots for a mixture fit");

  const double mean = shots.mean();
  const double var_mle = (shots - mean).square().sum() / static_cast<double>(n);
  if (!(var_mle > 0.0)) throw InvalidInput("shot values are all identical");
  const double sigma_all = std::sqrt(var_mle);
  const double sigma_floor = 1e-8 * sigma_all;

  ArrayXd sorted = shots;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    return sorted(static_cast<Index>(std::llround(q * static_cast<double>(n - 1))));
  };

  double w1 = 0.5;
  double mu1 = quantile(0.10);
  double mu2 = quantile(0.90);
  double s1 = sigma_all;
  double s2 = sigma_all;

  double ll = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  ArrayXd lp1(n), lp2(n), r1(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    iterations = it + 1;
    lp1 = std::log(w1) - 0.5 * ((shots - mu1) / s1).square() - std::log(s1) - LOG_SQRT_2PI;
    lp2 = std::log(1.0 - w1) - 0.5 * ((shots - mu2) / s2).square() - std::log(s2) - LOG_SQRT_2PI;
    const ArrayXd hi = lp1.max(lp2);
    const ArrayXd lse = hi + ((lp1 - hi).exp() + (lp2 - hi).exp()).log();
    const double ll_new = lse.sum();
    r1 = (lp1 - lse).exp();

    const double n1 = r1.sum();
    const double n2 = static_cast<double>(n) - n1;
    if (n1 > 1e-12 && n2 > 1e-12) {
      mu1 = (r1 * shots).sum() / n1;
      mu2 = ((1.0 - r1) * shots).sum() / n2;
      s1 = std::max(std::sqrt((r1 * (shots - mu1).square()).sum() / n1), sigma_floor);
      s2 = std::max(std::sqrt(((1.0 - r1) * (shots - mu2).square()).sum() / n2), sigma_floor);
      w1 = std::clamp(n1 / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    }

    if (std::isfinite(ll) && ll_new - ll < opts.tol_per_shot * static_cast<double>(n)) {
      ll = ll_new;
      converged = true;
      break;
    }
    ll = ll_new;
  }

  DoubleGaussianFit fit;
  fit.n_shots = n;
  fit.iterations = iterations;

  // A single Gaussian has 2 parameters against the mixture's 5; take the
  // mixture only when BIC justifies the extra three.
  const double ll_single = log_likelihood_single(shots, mean, sigma_all);
  const double logn = std::log(static_cast<double>(n));
  const double bic_mix = -2.0 * ll + 5.0 * logn;
  const double bic_single = -2.0 * ll_single + 2.0 * logn;
  if (bic_single <= bic_mix) {
    // The reported single-Gaussian parameters are the exact MLE, so a stalled
    // EM run is irrelevant on this branch. Near-degenerate mixtures are the
    // one case where EM legitimately creeps past any iteration cap.
    fit.collapsed = true;
    fit.frac_main = 1.0;
    fit.mu_main = fit.mu_spur = mean;
    fit.sigma_main = fit.sigma_spur = sigma_all;
    fit.log_likelihood = ll_single;
  } else {
    if (!converged) {
      throw FitFailure("gaussian mixture EM did not converge within the iteration cap");
    }
    fit.log_likelihood = ll;
    if (w1 >= 0.5) {
      fit.mu_main = mu1;
      fit.sigma_main = s1;
      fit.mu_spur = mu2;
      fit.sigma_spur = s2;
      fit.frac_main = w1;
    } else {
      fit.mu_main = mu2;
      fit.sigma_main = s2;
      fit.mu_spur = mu1;
      fit.sigma_spur = s1;
      fit.frac_main = 1.0 - w1;
    }
  }
  const double n_main = fit.frac_main * static_cast<double>(n);
  fit.mu_main_err = fit.sigma_main / std::sqrt(n_main);
  fit.sigma_main_err = fit.sigma_main / std::sqrt(2.0 * n_main);
  return fit;
}

SnrPoint snr_from_fits(const DoubleGaussianFit& f0, const DoubleGaussianFit& f1, double epsilon) {
  const double sep = std::abs(f1.mu_main - f0.mu_main);
  const double noise = 0.5 * (f0.sigma_main + f1.sigma_main);
  if (!(noise > 0.0)) throw InvalidInput("mixture fits carry zero width");
  SnrPoint pt;
  pt.epsilon = epsilon;
  pt.snr = sep / noise;
  const double var_sep = f0.mu_main_err * f0.mu_main_err + f1.mu_main_err * f1.mu_main_err;
  const double var_noise =
      0.25 * (f0.sigma_main_err * f0.sigma_main_err + f1.sigma_main_err * f1.sigma_main_err);
  pt.snr_err = std::sqrt(var_sep + pt.snr * pt.snr * var_noise) / noise;
  return pt;
}

SnrPoint snr_bootstrap(const ArrayXd& shots0, const ArrayXd& shots1, double epsilon,
                       int n_resamples, std::uint64_t seed, const EmOptions& opts) {
  if (n_resamples < 2) throw InvalidInput("bootstrap needs at least 2 resamples");
  SnrPoint pt = snr_from_fits(fit_double_gaussian(shots0, opts), fit_double_gaussian(shots1, opts),
                              epsilon);
  ArrayXd values(n_resamples);
  const auto resample = [](const ArrayXd& src, std::mt19937_64& rng) {
    std::uniform_int_distribution<Index> pick(0, src.size() - 1);
    ArrayXd out(src.size());
    for (Index i = 0; i < src.size(); ++i) out(i) = src(pick(rng));
    return out;
  };
  for (int b = 0; b < n_resamples; ++b) {
    std::mt19937_64 rng = stream_rng(seed, static_cast<std::uint64_t>(b));
    const ArrayXd s0 = resample(shots0, rng);
    const ArrayXd s1 = resample(shots1, rng);
    values(b) = snr_from_fits(fit_double_gaussian(s0, opts), fit_double_gaussian(s1, opts)).snr;
  }
  const double m = values.mean();
  pt.snr_err = std::sqrt((values - m).square().sum() / (n_resamples - 1));
  return pt;
}

CoherencePoint fit_ramsey_fringe(const RamseyFringeData& data, double epsilon) {
  const Index m = data.phi.size();
  if (m < 4) throw InvalidInput("Ramsey fringe fit needs at least 4 phase points");
  if (data.sigma_z.size() != m) throw InvalidInput("fringe arrays differ in length");

  Eigen::MatrixXd design(m, 2);
  design.col(0) = data.phi.cos().matrix();
  design.col(1) = data.phi.sin().matrix();
  const Eigen::VectorXd z = data.sigma_z.matrix();
  const Eigen::Matrix2d gram = design.transpose() * design;
  const Eigen::Vector2d coef = gram.ldlt().solve(design.transpose() * z);
  const double a = coef(0);
  const double b = coef(1);

  const double ssr = (z - design * coef).squaredNorm();
  const double s2 = ssr / static_cast<double>(m - 2);
  const Eigen::Matrix2d cov = s2 * gram.inverse();
  const double var_a = cov(0, 0);
  const double var_b = cov(1, 1);
  const double cov_ab = cov(0, 1);

  const double r2_raw = a * a + b * b;
  const double r2 = std::max(0.0, r2_raw - var_a - var_b);

  CoherencePoint pt;
  pt.epsilon = epsilon;
  pt.rho01 = 0.5 * std::sqrt(r2);
  if (r2 > 0.0) {
    const double var_r2 = 4.0 * (a * a * var_a + b * b * var_b + 2.0 * a * b * cov_ab);
    pt.rho01_err = 0.5 * std::sqrt(std::max(var_r2, 0.0)) / (2.0 * std::sqrt(r2_raw));
  } else {
    pt.rho01_err = 0.5 * std::sqrt(var_a + var_b);
  }
  pt.phi0 = std::atan2(-b, a);
  return pt;
}

GaussianDecayFit fit_gaussian_decay(const std::vector<CoherencePoint>& points) {
  const std::size_t n = points.size();
  if (n < 4) throw InvalidInput("gaussian decay fit needs at least 4 points");

  double rho_max = 0.0;
  double eps_max = 0.0;
  for (const auto& p : points) {
    rho_max = std::max(rho_max, p.rho01);
    eps_max = std::max(eps_max, std::abs(p.epsilon));
  }
  if (!(rho_max > 0.0) || !(eps_max > 0.0)) {
    throw FitFailure("no decaying coherence amplitude to fit");
  }

  // Log-linear seed: ln(rho) = ln(b) - eps^2 / (2 sigma^2) on the points that
  // are clearly above zero.
  double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
  int used = 0;
  for (const auto& p : points) {
    if (p.rho01 < 0.05 * rho_max) continue;
    const double x = p.epsilon * p.epsilon;
    const double y = std::log(p.rho01);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  double b0 = rho_max;
  double sigma0 = 0.5 * eps_max;
  if (used >= 2) {
    const double denom = used * sxx - sx * sx;
    if (std::abs(denom) > 0.0) {
      const double slope = (used * sxy - sx * sy) / denom;
      const double intercept = (sy - slope * sx) / used;
      b0 = std::clamp(std::exp(intercept), 1e-6, 1.0);
      if (slope < 0.0) sigma0 = 1.0 / std::sqrt(-2.0 * slope);
    }
  }

  const double err_floor = 1e-4 * rho_max;
  const auto residuals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = points[i];
      const double model = x(0) * std::exp(-p.epsilon * p.epsilon / (2.0 * x(1) * x(1)));
      r(i) = (model - p.rho01) / std::max(p.rho01_err, err_floor);
    }
    return r;
  };

  Eigen::VectorXd x0(2), lower(2), upper(2);
  x0 << b0, sigma0;
  lower << 0.0, 1e-6 * sigma0;
  upper << 2.0, 1e6 * sigma0;
  const LevMarResult lm = levenberg_marquardt(residuals, x0, {}, lower, upper);
  if (!lm.converged) throw FitFailure("gaussian decay fit did not converge");

  GaussianDecayFit fit;
  fit.b = lm.x(0);
  fit.sigma_m = lm.x(1);
  fit.chi2 = lm.chi2;
  fit.dof = static_cast<int>(n) - 2;
  if (lm.covariance.allFinite()) {
    fit.b_err = std::sqrt(std::max(lm.covariance(0, 0), 0.0));
    fit.sigma_m_err = std::sqrt(std::max(lm.covariance(1, 1), 0.0));
  } else {
    throw FitFailure("gaussian decay fit has a singular covariance");
  }
  return fit;
}

LinearSnrFit fit_linear_snr(const std::vector<SnrPoint>& points) {
  double swxx = 0.0, swxy = 0.0;
  double err_scale = 0.0;
  int n = 0;
  for (const auto& p : points) {
    if (p.epsilon > 0.0) err_scale = std::max(err_scale, std::abs(p.snr));
  }
  const double err_floor = 1e-9 * std::max(err_scale, 1e-300);
  for (const auto& p : points) {
    if (!(p.epsilon > 0.0)) continue;
    const double w = 1.0 / std::pow(std::max(p.snr_err, err_floor), 2);
    swxx += w * p.epsilon * p.epsilon;
    swxy += w * p.epsilon * p.snr;
    ++n;
  }
  if (n < 3) throw InvalidInput("linear SNR fit needs at least 3 nonzero-drive points");
  if (!(swxx > 0.0)) throw FitFailure("linear SNR fit is degenerate");

  LinearSnrFit fit;
  fit.a = swxy / swxx;
  fit.dof = n - 1;
  double chi2 = 0.0;
  for (const auto& p : points) {
    if (!(p.epsilon > 0.0)) continue;
    const double w = 1.0 / std::pow(std::max(p.snr_err, err_floor), 2);
    const double r = p.snr - fit.a * p.epsilon;
    chi2 += w * r * r;
  }
  fit.chi2 = chi2;
  fit.a_err = std::sqrt(std::max(chi2, 0.0) / (fit.dof * swxx));
  return fit;
}

EtaExtraction extract_eta(const LinearSnrFit& snr_fit, const GaussianDecayFit& decay_fit) {
  if (!(snr_fit.a > 0.0)) throw FitFailure("SNR slope must be positive to extract eta");
  if (!(decay_fit.sigma_m > 0.0)) throw FitFailure("dephasing scale must be positive");
  EtaExtraction out;
  out.a = snr_fit.a;
  out.a_err = snr_fit.a_err;
  out.sigma_m = decay_fit.sigma_m;
  out.sigma_m_err = decay_fit.sigma_m_err;
  out.b = decay_fit.b;
  out.eta_e = 0.5 * snr_fit.a * snr_fit.a * decay_fit.sigma_m * decay_fit.sigma_m;
  const double rel_a = 2.0 * snr_fit.a_err / snr_fit.a;
  const double rel_s = 2.0 * decay_fit.sigma_m_err / decay_fit.sigma_m;
  out.eta_err = out.eta_e * std::sqrt(rel_a * rel_a + rel_s * rel_s);
  return out;
}

}  // namespace qeff
