#pragma once

#include "qeff/cavity.hpp"
#include "qeff/types.hpp"

#include <cstdint>
#include <random>

namespace qeff {

// splitmix64 step; also used to derive independent sub-seeds from a master
// seed plus integer tags, so every shot owns its own counter-based stream.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

// Generator for one logical stream identified by (seed, stream). Streams with
// different indices are statistically independent and order-independent, so
// shots can be generated in any order with identical results.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

// One homodyne measurement record on the trajectory grid:
//   v_i[k] = v0 * ( sqrt(2*kappa*eta) * Re alpha(t_k) + g_k / sqrt(dt) )
// and likewise for v_q with Im alpha and an independent unit-variance
// Gaussian white-noise sequence.
struct ShotRecord {
  ArrayXd v_i;
  ArrayXd v_q;
};

ShotRecord generate_record(const ArrayXcd& alpha, const ReadoutParams& p, double dt,
                           std::uint64_t seed, std::uint64_t shot_index);

// Weighted trapezoidal integral of one record: int (w_i*v_i + w_q*v_q) dt.
double integrate_shot(const ShotRecord& rec, const WeightFunctions& w, double dt);

// Mean record (no noise): what v_i, v_q average to over many shots.
ShotRecord mean_record(const ArrayXcd& alpha, const ReadoutParams& p);

// Record averaged over n_shots noisy shots, as measured transients would be.
ShotRecord average_record(const ArrayXcd& alpha, const ReadoutParams& p, double dt, int n_shots,
                          std::uint64_t seed);

// Integrated outcomes of n_shots preparations of `prepared`. With
// prep_error > 0 each shot flips to the other state with that probability
// before the record is generated (readout errors of the initialization kind).
// Shot i uses stream (seed, stream_offset + i).
ArrayXd simulate_integrated_shots(const FieldTrajectory& traj, const ReadoutParams& p,
                                  const WeightFunctions& w, QubitState prepared, int n_shots,
                                  std::uint64_t seed, std::uint64_t stream_offset = 0,
                                  double prep_error = 0.0);

// Ramsey-style coherence probe: the qubit is prepared on the equator, the
// readout pulse is played, and a final pi/2 pulse with phase phi maps the
// remaining coherence onto <sigma_z>(phi) = 2*|rho01| * cos(phi + phi0) with
//   |rho01| = (contrast/2) * exp(-Gamma_m),   phi0 = phase_offset + deterministic phase.
// Each phase point averages shots_per_point single-shot +-1 outcomes drawn
// binomially, so the returned sigma_z carries sampling noise.
struct RamseyModel {
  double contrast = 1.0;      // 2*|rho01| at zero measurement drive
  double phase_offset = 0.0;  // static phase picked up outside the readout
};

struct RamseyFringeData {
  ArrayXd phi;      // final pi/2 phases
  ArrayXd sigma_z;  // measured <sigma_z> per phase
  int shots_per_point = 0;
};

RamseyFringeData simulate_ramsey(const FieldTrajectory& traj, const ReadoutParams& p,
                                 int n_phases, int shots_per_point, std::uint64_t seed,
                                 const RamseyModel& model = {});

}  // namespace qeff
