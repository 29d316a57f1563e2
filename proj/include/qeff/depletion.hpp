#pragma once

#include "qeff/cavity.hpp"
#include "qeff/homodyne.hpp"
#include "qeff/nelder_mead.hpp"
#include "qeff/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qeff {

// Amplitudes and phases of the two counter-drive (photon depletion) segments.
struct DepletionParams {
  double eps_d0 = 0.0;  // rad/s, >= 0 in reported results
  double eps_d1 = 0.0;
  double phi_d0 = 0.0;  // rad, reported wrapped to (-pi, pi]
  double phi_d1 = 0.0;
};

DepletionParams drives_to_params(Complex d0, Complex d1);
std::pair<Complex, Complex> params_to_drives(const DepletionParams& dp);

enum class TuneupMode { noiseless, monte_carlo };

// Tune-up cost, evaluated on the per-state transients in the window of
// `window` seconds that starts when the last depletion segment ends:
//   c = sqrt( int |v0bar|^2 dt ) + sqrt( int |v1bar|^2 dt )
//     + d * sqrt( int (vI1-vI0)^2 dt ) + d * sqrt( int (vQ1-vQ0)^2 dt )
// where |v|^2 = vI^2 + vQ^2. In monte_carlo mode the transients are averages
// over `shots` noisy records per state, drawn with a seed that is fixed across
// cost evaluations (common random numbers), so the cost surface stays
// deterministic for the optimizer.
struct DepletionCostConfig {
  double difference_weight = 10.0;  // d
  double window = 200e-9;           // seconds
  int shots = 1 << 15;              // per state, monte_carlo mode only
};

double depletion_cost(const ReadoutParams& p, const PulseEnvelope& env,
                      std::pair<std::size_t, std::size_t> segs, const DepletionParams& dp,
                      const DepletionCostConfig& cfg, TuneupMode mode, std::uint64_t seed = 0);

struct DepletionTraceRow {
  int evaluation = 0;
  DepletionParams params;
  double cost = 0.0;
};

struct DepletionResult {
  DepletionParams params;
  double cost = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<DepletionTraceRow> trace;
};

// Nelder-Mead tune-up of the four depletion parameters, mirroring how the
// pulse would be calibrated against measured transients. The initial simplex
// steps are 20% of the measurement drive scale on the amplitudes and 0.2 rad
// on the phases. In monte_carlo mode the stopping tolerance is tied to the
// shot-noise floor of the cost estimate, (2 + 2*sqrt(2)*d) * v0 / sqrt(shots),
// scaled by 1e-4 since common random numbers keep cost differences meaningful
// well below the floor itself. Hitting the evaluation cap returns the best
// point seen with converged = false.
DepletionResult optimize_depletion(const ReadoutParams& p, const PulseEnvelope& env,
                                   std::pair<std::size_t, std::size_t> segs,
                                   const DepletionParams& initial, const DepletionCostConfig& cfg,
                                   TuneupMode mode, const NelderMeadOptions& opts = {},
                                   std::uint64_t seed = 0);

// Reasonable starting point for the tune-up: both amplitudes at the peak
// drive of the non-depletion segments, both phases zero.
DepletionParams default_depletion_guess(const PulseEnvelope& env);

}  // namespace qeff
