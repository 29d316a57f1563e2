#pragma once

#include "qeff/experiment.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace qeff::cmd {

/* Exit codes shared by every subcommand:
 *   0 success
 *   1 internal error (unexpected exception, selftest failure)
 *   2 config or input schema error
 *   3 simulation error (degenerate weights, singular depletion system)
 *   4 fit failure
 *   5 file I/O error */
inline constexpr int EXIT_OK = 0;
inline constexpr int EXIT_INTERNAL = 1;
inline constexpr int EXIT_CONFIG = 2;
inline constexpr int EXIT_SIMULATION = 3;
inline constexpr int EXIT_FIT = 4;
inline constexpr int EXIT_IO = 5;

/* Command-line flags that override fields of the loaded config. `mode`
 * applies to the depletion tune-up ("noiseless" or "mc"), `shots` to the
 * histogram stage. */
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> shots;
  std::optional<std::string> mode;
};

ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides);

int calibrate_weights(const ExperimentConfig& config);
int extract_eta(const ExperimentConfig& config);
int sweep_detuning(const ExperimentConfig& config);
int optimize_depletion_cmd(const ExperimentConfig& config);
int fit_chain_cmd(const std::string& csv_path, double freq, int n_sections,
                  const std::string& out_dir);
int selftest(std::uint64_t seed);

/* Runs `body`, mapping thrown domain errors onto the exit codes above and
 * printing the reason to stderr. */
int run_protected(const std::function<int()>& body);

}  // namespace qeff::cmd
