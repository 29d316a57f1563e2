#pragma once

#include "qeff/cavity.hpp"
#include "qeff/depletion.hpp"
#include "qeff/estimation.hpp"
#include "qeff/homodyne.hpp"
#include "qeff/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qeff {

enum class DepletionMode { active, passive };

/* One named measurement condition of the detuning sweep. */
struct SweepCondition {
  WeightKind weights = WeightKind::optimal;
  DepletionMode depletion = DepletionMode::active;
};

/* Resolved experiment description. All knobs live here so a run is a pure
 * function of this struct; the seed is mandatory and there are no
 * wall-clock defaults anywhere downstream. */
struct ExperimentConfig {
  ReadoutParams params;          // eta is the injected efficiency
  PulseEnvelope envelope;        // measurement pulse, depletion segments marked
  std::string envelope_path;     // provenance only; empty when inline

  std::vector<double> eps_grid;  // drive amplitudes (rad/s); empty -> auto grid
  int grid_points = 13;          // auto grid size (includes epsilon = 0)
  double gamma_max = 4.0;        // dephasing exponent targeted at the top of the auto grid

  int histogram_shots = 1 << 15;  // per qubit state per epsilon
  int ramsey_shots = 1 << 10;     // per phase point
  int ramsey_phases = 32;
  double ramsey_contrast = 1.0;   // baseline fringe contrast b0
  double prep_error = 0.0;        // state preparation flip probability

  std::uint64_t seed = 0;
  WeightKind weight_kind = WeightKind::optimal;
  DepletionMode depletion_mode = DepletionMode::active;
  double passive_wait = 1000e-9;  // extra ring-down time in passive mode

  TuneupMode tuneup_mode = TuneupMode::monte_carlo;
  DepletionCostConfig tuneup_cost;

  std::vector<double> delta_list;          // sweep-detuning only (rad/s)
  std::vector<SweepCondition> conditions;  // sweep-detuning only; empty -> all four

  std::string out_dir = "out";

  void validate() const;
};

/* Step 1 output: tuned envelope, calibrated weights, and the mean-field
 * transients they came from. */
struct CalibrationResult {
  PulseEnvelope tuned;                     // depletion drives applied (active) or wait appended
  std::optional<DepletionResult> tuneup;   // present in active mode
  FieldTrajectory trajectory;              // transients of the tuned envelope
  WeightFunctions weights;
  double eps_ref = 0.0;                    // amplitude the calibration ran at
};

/* Full three-step result with everything needed to reproduce it. */
struct EtaReport {
  ExperimentConfig config;                 // resolved
  std::optional<DepletionResult> tuneup;
  double eps_ref = 0.0;
  std::vector<double> eps_grid;            // grid actually used
  std::vector<CoherencePoint> coherence;   // step 2, includes epsilon = 0
  std::vector<SnrPoint> snr;               // step 3, epsilon > 0 only
  GaussianDecayFit decay;
  LinearSnrFit snr_fit;
  EtaExtraction extraction;
};

struct DetuningConditionResult {
  double delta = 0.0;
  SweepCondition condition;
  bool ok = false;
  std::string error;       // empty when ok
  double eta_e = 0.0;
  double eta_err = 0.0;
};

struct DetuningSweepResult {
  std::vector<DetuningConditionResult> rows;
  std::vector<EtaReport> reports;  // successful extractions, row order
};

const char* weight_kind_name(WeightKind kind);
const char* depletion_mode_name(DepletionMode mode);

/* Tunes depletion (active mode) or appends the passive wait, then extracts
 * integration weights from the averaged transients of the tuned envelope. */
CalibrationResult run_calibration(const ExperimentConfig& config);

/* The drive grid run_extraction will use: the configured grid, or
 * grid_points amplitudes linearly spaced from zero to the amplitude where
 * the dephasing exponent reaches gamma_max (dephasing scales as the square
 * of the drive, so one probe trajectory fixes the whole grid). */
std::vector<double> resolve_eps_grid(const ExperimentConfig& config,
                                     const CalibrationResult& calib);

/* Steps 2 + 3 on a calibrated setup, then the combined eta extraction. */
EtaReport run_extraction(const ExperimentConfig& config);

/* Re-tunes and re-extracts per detuning for every requested condition.
 * Failures are captured per condition; the sweep continues. */
DetuningSweepResult run_detuning_sweep(const ExperimentConfig& config);

}  // namespace qeff
