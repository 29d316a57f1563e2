#pragma once

#include <Eigen/Dense>

#include <vector>

namespace qeff {

// Efficiency model of the amplification chain: a fixed pre-amplifier section,
// a distributed parametric amplifier with internal loss, and the following
// (HEMT-dominated) stage whose added noise is referred back through the gain.
//   eta(G) = eta_pre * eta_twpa_distributed(G, loss) * eta_post(G, T_N, f)

// Degradation of a phase-insensitive distributed amplifier with total gain
// gain_db and total internal insertion loss loss_db, modeled as n_sections
// alternating gain/loss slices. Added noise referred to the input accumulates
// as a_gain = (g-1)/(2*G_before) per gain slice and a_loss = (1-l)/(2*G_after)
// per loss slice. The result is the input-referred noise of the ideal lossless
// amplifier at the same gain over that of the lossy one:
//   eta = (1/2 + A_ideal) / (1/2 + A_lossy),
// which is 1 for zero loss and decreases as loss grows.
double eta_twpa_distributed(double gain_db, double loss_db, int n_sections = 100);

// Efficiency of the stage after the parametric amplifier: its added noise
// temperature t_noise (kelvin) at frequency freq (Hz) is divided by the gain,
//   eta_post = 1 / (1 + 2 * k_B * t_noise / (h * freq * G)).
double eta_post(double gain_db, double t_noise, double freq);

struct ChainParams {
  double eta_pre = 1.0;           // efficiency in front of the amplifier
  double insertion_loss_db = 0.0; // distributed loss of the amplifier
  double t_noise = 0.0;           // noise temperature of the following stage, K
  double freq = 0.0;              // readout frequency, Hz
  int n_sections = 100;
};

double eta_chain(const ChainParams& p, double gain_db);

struct GainEtaPoint {
  double gain_db = 0.0;
  double eta_e = 0.0;
  double eta_err = 0.0;
};

// Fit (eta_pre, insertion_loss_db, t_noise) to measured efficiency vs gain.
// Multi-start Levenberg-Marquardt; throws FitFailure when no start converges.
struct ChainFit {
  ChainParams params;
  Eigen::Matrix3d covariance;
  double chi2 = 0.0;
  int dof = 0;
};

ChainFit fit_chain(const std::vector<GainEtaPoint>& data, double freq, int n_sections = 100);

}  // namespace qeff
