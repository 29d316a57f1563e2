#pragma once

#include "qeff/chain.hpp"
#include "qeff/depletion.hpp"
#include "qeff/experiment.hpp"
#include "qeff/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qeff::io {

/* File-level failures (missing, unreadable, malformed beyond schema repair).
 * Schema violations inside an otherwise readable file throw InvalidInput so
 * the command layer can map them to the config exit code. */
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Envelope files: JSON object with keys
 *   sample_period_ns : number (optional, default 1.0)
 *   buffer_ns        : number (optional, default 0)
 *   segments         : array of segment objects, each either
 *     {duration_ns, amplitude, phase_rad?, depletion?}       constant drive
 *     {duration_ns, samples: [[re, im], ...], depletion?}    sampled drive
 * Amplitudes are angular drive rates in rad/s; sampled segments list one
 * complex point per grid node (steps + 1 entries). Unknown keys are
 * rejected by name. */
PulseEnvelope envelope_from_json_text(const std::string& text);
std::string envelope_to_json_text(const PulseEnvelope& env);
PulseEnvelope read_envelope(const std::filesystem::path& path);
void write_envelope(const std::filesystem::path& path, const PulseEnvelope& env);

/* Experiment config: JSON object, strict schema, seed mandatory. The
 * envelope comes either inline under "envelope" or from "envelope_file"
 * (resolved relative to the config file's directory). */
ExperimentConfig read_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::filesystem::path& base_dir);
std::string experiment_config_to_json_text(const ExperimentConfig& config);

/* Eta report: full extraction output with the resolved config and seed
 * embedded; serialization is deterministic (no timestamps). */
std::string report_to_json_text(const EtaReport& report);
void write_report(const std::filesystem::path& path, const EtaReport& report);

/* Chain data CSV: header "gain_db,eta_e,eta_err", one point per line.
 * Parse failures name the offending line number. */
std::vector<GainEtaPoint> read_chain_csv(const std::filesystem::path& path);
void write_chain_csv(const std::filesystem::path& path, const std::vector<GainEtaPoint>& points);

ChainFit chain_fit_from_json_text(const std::string& text);
std::string chain_fit_to_json_text(const ChainFit& fit);
void write_chain_fit(const std::filesystem::path& path, const ChainFit& fit);

/* Stage curves for the chain model: gain_db, eta_twpa, eta_post, eta_total. */
void write_chain_curves_csv(const std::filesystem::path& path, const ChainParams& params,
                            double gain_lo_db, double gain_hi_db, int n_points);

/* Mean-field transients: t_ns, re_a0, im_a0, re_a1, im_a1. */
void write_trajectory_csv(const std::filesystem::path& path, const FieldTrajectory& traj);

/* Integration weights on the same grid: t_ns, w_i, w_q. */
void write_weights_csv(const std::filesystem::path& path, const WeightFunctions& weights,
                       double sample_period);

/* Tune-up trace: iteration, eps_d0, phi_d0, eps_d1, phi_d1, cost. */
void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<DepletionTraceRow>& trace);

/* Depletion parameters with both absolute and reference-relative
 * amplitudes. */
std::string depletion_to_json_text(const DepletionResult& result, double eps_ref);
void write_depletion(const std::filesystem::path& path, const DepletionResult& result,
                     double eps_ref);

/* Per-epsilon measurement points: epsilon, snr, snr_err and
 * epsilon, rho01, rho01_err, phi0. */
void write_snr_csv(const std::filesystem::path& path, const std::vector<SnrPoint>& points);
void write_coherence_csv(const std::filesystem::path& path,
                         const std::vector<CoherencePoint>& points);

/* Detuning sweep summary: one row per (delta, weights, depletion) condition. */
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<DetuningConditionResult>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qeff::io
