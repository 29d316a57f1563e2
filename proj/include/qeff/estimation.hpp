#pragma once

#include "qeff/homodyne.hpp"
#include "qeff/types.hpp"

#include <cstdint>
#include <vector>

namespace qeff {

// Two-component 1-D Gaussian mixture fitted by expectation-maximization.
// The main component is the one with the larger weight. When the Bayesian
// information criterion prefers a single Gaussian, the fit collapses to one
// component (frac_main = 1) and `collapsed` is set.
struct DoubleGaussianFit {
  double mu_main = 0.0;
  double sigma_main = 0.0;
  double mu_spur = 0.0;
  double sigma_spur = 0.0;
  double frac_main = 1.0;
  double mu_main_err = 0.0;
  double sigma_main_err = 0.0;
  double log_likelihood = 0.0;
  int iterations = 0;
  Index n_shots = 0;
  bool collapsed = false;
};

struct EmOptions {
  int max_iter = 500;
  double tol_per_shot = 1e-9;  // stop when the log-likelihood gain per shot drops below this
  Index min_shots = 1000;
};

DoubleGaussianFit fit_double_gaussian(const ArrayXd& shots, const EmOptions& opts = {});

// Readout signal-to-noise at one drive amplitude: |mu1 - mu0| of the main
// components over the mean main-component sigma, with a delta-method error.
struct SnrPoint {
  double epsilon = 0.0;
  double snr = 0.0;
  double snr_err = 0.0;
};

SnrPoint snr_from_fits(const DoubleGaussianFit& f0, const DoubleGaussianFit& f1,
                       double epsilon = 0.0);

// Same point estimate with the error taken from refitting bootstrap resamples.
SnrPoint snr_bootstrap(const ArrayXd& shots0, const ArrayXd& shots1, double epsilon,
                       int n_resamples = 200, std::uint64_t seed = 0,
                       const EmOptions& opts = {});

// Remaining qubit coherence at one drive amplitude, from a Ramsey fringe
// z(phi) ~ A cos(phi) + B sin(phi). The amplitude estimate sqrt(A^2 + B^2) is
// noise-floor corrected by subtracting Var(A) + Var(B) under the square root,
// so fully dephased fringes average to zero instead of the noise level.
struct CoherencePoint {
  double epsilon = 0.0;
  double rho01 = 0.0;
  double rho01_err = 0.0;
  double phi0 = 0.0;  // fringe phase, z ~ 2*rho01*cos(phi + phi0)
};

CoherencePoint fit_ramsey_fringe(const RamseyFringeData& data, double epsilon = 0.0);

// Coherence vs drive amplitude: rho01(eps) = b * exp(-eps^2 / (2*sigma_m^2)),
// b at most 1/2. Weighted Levenberg-Marquardt fit of b and sigma_m.
struct GaussianDecayFit {
  double b = 0.0;
  double b_err = 0.0;
  double sigma_m = 0.0;
  double sigma_m_err = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

GaussianDecayFit fit_gaussian_decay(const std::vector<CoherencePoint>& points);

// SNR vs drive amplitude: weighted straight line through the origin over the
// nonzero-amplitude points. The slope error is scaled by the residual chi2,
// so points lying exactly on a line give a_err = 0.
struct LinearSnrFit {
  double a = 0.0;
  double a_err = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

LinearSnrFit fit_linear_snr(const std::vector<SnrPoint>& points);

// eta_e = a^2 * sigma_m^2 / 2, errors combined in quadrature from the two fits.
struct EtaExtraction {
  double a = 0.0;
  double a_err = 0.0;
  double sigma_m = 0.0;
  double sigma_m_err = 0.0;
  double b = 0.0;
  double eta_e = 0.0;
  double eta_err = 0.0;
};

EtaExtraction extract_eta(const LinearSnrFit& snr_fit, const GaussianDecayFit& decay_fit);

}  // namespace qeff
