#pragma once

#include "qeff/types.hpp"

#include <utility>

namespace qeff {

// Complex decay rate lambda_s = i*(delta + s*chi) + kappa/2 with s = +1 for
// |0> and -1 for |1>. The linear cavity obeys d(alpha)/dt = -i*eps(t) - lambda_s*alpha.
Complex field_decay_rate(const ReadoutParams& p, QubitState s);

// Intra-resonator field for one qubit state on the envelope grid, alpha(0)=0.
// Constant segments propagate exactly through the closed-form transient;
// sampled segments integrate with fixed-step RK4 on the same grid.
ArrayXcd evolve_field(const ReadoutParams& p, const PulseEnvelope& env, QubitState s);

FieldTrajectory simulate_trajectory(const ReadoutParams& p, const PulseEnvelope& env);

// Measurement-induced dephasing exponent Gamma_m = 2*chi * int Im(alpha1 * conj(alpha0)) dt.
// Non-negative for any drive; the off-diagonal qubit element decays as exp(-Gamma_m).
double dephasing_exponent(const FieldTrajectory& traj, double chi);

// Deterministic measurement-induced phase 2*chi * int Re(alpha1 * conj(alpha0)) dt.
double deterministic_phase(const FieldTrajectory& traj, double chi);

// Matched-filter weights proportional to the pointer separation alpha1 - alpha0,
// peak-normalized. Throws DegenerateWeights when the separation never exceeds
// `min_separation` relative to the field scale.
WeightFunctions optimal_weights(const FieldTrajectory& traj, double min_separation = 1e-12);

// Constant demodulation weights (cos(phi_w), sin(phi_w)) on an n-sample grid.
WeightFunctions square_weights(double phi_w, Index n_samples);

// Demodulation phase maximizing the model SNR of square weights, found by
// scanning n_scan equally spaced phases over [0, pi) and refining the best
// candidate with golden-section search. (SNR is pi-periodic in phi_w.)
double optimize_square_phase(const FieldTrajectory& traj, const ReadoutParams& p,
                             int n_scan = 256);

// Model signal-to-noise of the integrated shot for arbitrary weights:
//   S = v0 * sqrt(2*kappa*eta) * | int (w_i*Re + w_q*Im)(alpha1 - alpha0) dt |
//   N^2 = v0^2 * int (w_i^2 + w_q^2) dt
// and SNR = S / N. The per-shot integrated voltages are Gaussian with means
// +-S/2 around the midpoint and standard deviation N.
double analytic_signal(const FieldTrajectory& traj, const ReadoutParams& p,
                       const WeightFunctions& w);
double analytic_noise(const ReadoutParams& p, const WeightFunctions& w, double dt);
double analytic_snr(const FieldTrajectory& traj, const ReadoutParams& p,
                    const WeightFunctions& w);

// Same quantity for ideal matched weights, via the closed form
// sqrt(2*kappa*eta * int |alpha1 - alpha0|^2 dt).
double analytic_snr_optimal(const FieldTrajectory& traj, const ReadoutParams& p);

// Complex amplitudes for the two depletion segments that null both pointer
// states at the end of the envelope. The dynamics are linear in the drive, so
// the final fields split into a base part plus the unit responses of the two
// segments scaled by the unknown amplitudes; nulling is one 2x2 complex solve.
// `segs` indexes the two depletion segments within env.segments.
// Throws SingularSystem when the two responses cannot distinguish the states
// (e.g. chi == 0).
std::pair<Complex, Complex> solve_depletion(const ReadoutParams& p, const PulseEnvelope& env,
                                            std::pair<std::size_t, std::size_t> segs);

// Envelope with the two depletion segments set to the given complex drives.
PulseEnvelope with_depletion_drives(PulseEnvelope env, std::pair<std::size_t, std::size_t> segs,
                                    Complex d0, Complex d1);

}  // namespace qeff
