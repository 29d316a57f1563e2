#include "qeff/estimation.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "stat_utils.hpp"

#include <cmath>

using namespace qeff;
using namespace testutil;

namespace {

ArrayXd gaussian_mixture_sample(Index n, double w_main, double mu_main, double s_main,
                                double mu_spur, double s_spur, std::uint64_t seed) {
  std::mt19937_64 rng = stream_rng(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ArrayXd out(n);
  for (Index i = 0; i < n; ++i) {
    if (uni(rng) < w_main) {
      out(i) = mu_main + s_main * gauss(rng);
    } else {
      out(i) = mu_spur + s_spur * gauss(rng);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("EM recovers a well-separated two-component mixture") {
  const Index n = 1 << 15;
  const ArrayXd shots = gaussian_mixture_sample(n, 0.9, 0.0, 1.0, 5.0, 1.0, 11);
  const DoubleGaussianFit fit = fit_double_gaussian(shots);
  CHECK_FALSE(fit.collapsed);
  CHECK(std::abs(fit.mu_main - 0.0) < 0.05);
  CHECK(std::abs(fit.mu_spur - 5.0) < 0.05);
  CHECK(std::abs(fit.sigma_main - 1.0) < 0.05);
  CHECK(std::abs(fit.frac_main - 0.9) < 0.01);
  CHECK(fit.mu_main_err == doctest::Approx(fit.sigma_main / std::sqrt(0.9 * n)).epsilon(0.05));
}

TEST_CASE("a single Gaussian collapses to one component") {
  const Index n = 1 << 14;
  const ArrayXd shots = gaussian_mixture_sample(n, 1.0, 2.0, 3.0, 0.0, 1.0, 5);
  const DoubleGaussianFit fit = fit_double_gaussian(shots);
  CHECK(fit.collapsed);
  CHECK(fit.frac_main == 1.0);
  CHECK(std::abs(fit.mu_main - 2.0) < 4.0 * 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(fit.sigma_main - 3.0) < 4.0 * 3.0 / std::sqrt(2.0 * double(n)));
}

TEST_CASE("mixture fit input validation") {
  CHECK_THROWS_AS(fit_double_gaussian(ArrayXd::Zero(100)), InvalidInput);
  CHECK_THROWS_AS(fit_double_gaussian(ArrayXd::Constant(4096, 1.5)), InvalidInput);
}

TEST_CASE("snr_from_fits combines separations and widths with delta-method errors") {
  DoubleGaussianFit f0, f1;
  f0.mu_main = 0.0;
  f0.sigma_main = 1.0;
  f0.mu_main_err = 0.01;
  f0.sigma_main_err = 0.005;
  f1.mu_main = 3.0;
  f1.sigma_main = 1.0;
  f1.mu_main_err = 0.02;
  f1.sigma_main_err = 0.005;
  const SnrPoint pt = snr_from_fits(f0, f1, 0.25);
  CHECK(pt.epsilon == 0.25);
  CHECK(pt.snr == doctest::Approx(3.0).epsilon(1e-14));
  // var(sep) = 1e-4 + 4e-4; var(noise) = (2.5e-5 + 2.5e-5)/4; err =
  // sqrt(5e-4 + 9 * 1.25e-5) / 1.
  CHECK(pt.snr_err == doctest::Approx(std::sqrt(6.125e-4)).epsilon(1e-12));
}

TEST_CASE("monte-carlo SNR agrees with the analytic value") {
  const ReadoutParams p = default_params(0.0, 0.165);
  const FieldTrajectory traj = simulate_trajectory(p, ramp_envelope());
  const WeightFunctions w = optimal_weights(traj);
  const int n = 1 << 14;
  const ArrayXd s0 = simulate_integrated_shots(traj, p, w, QubitState::ground, n, 404, 0);
  const ArrayXd s1 = simulate_integrated_shots(traj, p, w, QubitState::excited, n, 404, n);
  const SnrPoint pt = snr_from_fits(fit_double_gaussian(s0), fit_double_gaussian(s1));
  const double want = analytic_snr(traj, p, w);
  CHECK(std::abs(pt.snr - want) < 4.0 * pt.snr_err);

  const SnrPoint boot = snr_bootstrap(s0, s1, 0.0, 64, 99);
  CHECK(boot.snr == pt.snr);
  CHECK(boot.snr_err > 0.4 * pt.snr_err);
  CHECK(boot.snr_err < 2.5 * pt.snr_err);
}

TEST_CASE("fringe fit recovers amplitude and phase exactly on clean data") {
  RamseyFringeData data;
  data.phi = ArrayXd::LinSpaced(33, 0.0, 2.0 * TWO_PI);
  data.sigma_z = 2.0 * 0.3 * (data.phi + 1.1).cos();
  data.shots_per_point = 1;
  const CoherencePoint pt = fit_ramsey_fringe(data, 0.5);
  CHECK(pt.epsilon == 0.5);
  CHECK(pt.rho01 == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pt.phi0 == doctest::Approx(1.1).epsilon(1e-10));
  CHECK(pt.rho01_err == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fringe fit is noise-floor corrected") {
  // Pure noise: the corrected amplitude should sit at zero within errors,
  // and well below the raw sqrt(A^2+B^2) floor on average.
  const int n_seeds = 64;
  double mean_corrected = 0.0;
  double mean_raw = 0.0;
  int within = 0;
  for (int s = 0; s < n_seeds; ++s) {
    RamseyFringeData data;
    data.phi = ArrayXd::LinSpaced(33, 0.0, 2.0 * TWO_PI);
    std::mt19937_64 rng = stream_rng(900, s);
    std::normal_distribution<double> gauss(0.0, 0.02);
    data.sigma_z = ArrayXd(33);
    for (Index j = 0; j < 33; ++j) data.sigma_z(j) = gauss(rng);
    data.shots_per_point = 1;
    const CoherencePoint pt = fit_ramsey_fringe(data);
    mean_corrected += pt.rho01;
    if (pt.rho01 <= 3.0 * pt.rho01_err) ++within;

    // Raw amplitude estimate without the variance subtraction.
    Eigen::MatrixXd X(33, 2);
    X.col(0) = data.phi.cos().matrix();
    X.col(1) = data.phi.sin().matrix();
    const Eigen::Vector2d coef =
        (X.transpose() * X).ldlt().solve(X.transpose() * data.sigma_z.matrix());
    mean_raw += 0.5 * coef.norm();
  }
  mean_corrected /= n_seeds;
  mean_raw /= n_seeds;
  CHECK(mean_corrected < 0.5 * mean_raw);
  CHECK(within >= 58);  // ~3 sigma coverage out of 64 trials
}

TEST_CASE("gaussian decay fit recovers clean parameters") {
  std::vector<CoherencePoint> pts;
  for (int i = 0; i < 13; ++i) {
    const double eps = i * 1.0;
    CoherencePoint pt;
    pt.epsilon = eps;
    pt.rho01 = 0.48 * std::exp(-eps * eps / (2.0 * 7.0 * 7.0));
    pt.rho01_err = 1e-3;
    pts.push_back(pt);
  }
  const GaussianDecayFit fit = fit_gaussian_decay(pts);
  CHECK(fit.b == doctest::Approx(0.48).epsilon(1e-6));
  CHECK(fit.sigma_m == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(fit.chi2 < 1e-10);

  CHECK_THROWS_AS(fit_gaussian_decay(std::vector<CoherencePoint>(3)), InvalidInput);
  std::vector<CoherencePoint> flat(6);
  for (int i = 0; i < 6; ++i) flat[i].epsilon = i;
  CHECK_THROWS_AS(fit_gaussian_decay(flat), FitFailure);
}

TEST_CASE("gaussian decay fit is statistically consistent under noise") {
  std::mt19937_64 rng = stream_rng(31337, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CoherencePoint> pts;
  for (int i = 0; i < 13; ++i) {
    const double eps = i * 1.0;
    CoherencePoint pt;
    pt.epsilon = eps;
    pt.rho01_err = 0.004;
    pt.rho01 = 0.48 * std::exp(-eps * eps / 98.0) + pt.rho01_err * gauss(rng);
    pts.push_back(pt);
  }
  const GaussianDecayFit fit = fit_gaussian_decay(pts);
  CHECK(std::abs(fit.b - 0.48) < 4.0 * fit.b_err);
  CHECK(std::abs(fit.sigma_m - 7.0) < 4.0 * fit.sigma_m_err);
  CHECK(fit.chi2 / fit.dof < 3.0);
}

TEST_CASE("linear SNR fit uses nonzero-drive points and reports honest errors") {
  std::vector<SnrPoint> pts;
  pts.push_back({0.0, 123.0, 0.01});  // excluded: zero drive
  for (int i = 1; i <= 6; ++i) {
    pts.push_back({0.5 * i, 0.37 * 0.5 * i, 0.01});
  }
  const LinearSnrFit fit = fit_linear_snr(pts);
  CHECK(fit.a == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(fit.a_err == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.dof == 5);

  std::vector<SnrPoint> few = {{1.0, 1.0, 0.1}, {2.0, 2.0, 0.1}};
  CHECK_THROWS_AS(fit_linear_snr(few), InvalidInput);
}

TEST_CASE("eta extraction combines slope and dephasing scale") {
  LinearSnrFit lf;
  lf.a = 2.0;
  lf.a_err = 0.02;
  GaussianDecayFit df;
  df.sigma_m = 0.5;
  df.sigma_m_err = 0.004;
  df.b = 0.49;
  const EtaExtraction out = extract_eta(lf, df);
  CHECK(out.eta_e == doctest::Approx(0.5).epsilon(1e-14));
  // rel errors: 2*0.02/2 = 0.02 and 2*0.004/0.5 = 0.016 -> 0.5*sqrt(6.56e-4).
  CHECK(out.eta_err == doctest::Approx(0.5 * std::sqrt(6.56e-4)).epsilon(1e-10));
  CHECK(out.b == 0.49);

  lf.a = -1.0;
  CHECK_THROWS_AS(extract_eta(lf, df), FitFailure);
}

TEST_CASE("anderson-darling helper flags non-normal data") {
  std::mt19937_64 rng = stream_rng(2718, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ArrayXd normal(4096), uniform(4096);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Index i = 0; i < 4096; ++i) {
    normal(i) = gauss(rng);
    uniform(i) = uni(rng);
  }
  CHECK(anderson_darling_normal_pvalue(normal) > 0.01);
  CHECK(anderson_darling_normal_pvalue(uniform) < 1e-4);
}
