#include "qeff/experiment.hpp"

#include "qeff/cavity.hpp"
#include "qeff/io.hpp"
#include "qeff/types.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

using namespace qeff;

namespace {

const double KAPPA = TWO_PI * 1.4e6;
const double CHI = TWO_PI * -52.5e3;
const double EPS0 = 1.25e7;

PulseEnvelope readout_envelope() {
  PulseEnvelope env;
  env.sample_period = 1e-9;
  env.buffer = 200e-9;
  env.segments.push_back({600e-9, EPS0, 0.0, {}, false});
  env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
  env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
  return env;
}

/* Small but honest statistics: the closed loop stays under a second while
 * the eta error bar remains a few percent. */
ExperimentConfig fast_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.params.kappa = KAPPA;
  c.params.chi = CHI;
  c.params.eta = 0.165;
  c.envelope = readout_envelope();
  c.grid_points = 9;
  c.histogram_shots = 1 << 10;
  c.ramsey_shots = 1 << 9;
  c.ramsey_phases = 24;
  c.seed = seed;
  c.tuneup_mode = TuneupMode::noiseless;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("calibration tunes the depletion segments and extracts weights") {
  const ExperimentConfig config = fast_config(11);
  const CalibrationResult calib = run_calibration(config);

  CHECK(calib.eps_ref == doctest::Approx(EPS0));
  REQUIRE(calib.tuneup.has_value());
  CHECK(calib.tuneup->converged);
  CHECK(calib.tuned.segments[1].amplitude > 0.0);
  CHECK(calib.tuned.segments[2].amplitude > 0.0);

  /* The tuned envelope leaves both pointer states near vacuum at the end of
   * the depletion window, far below the untuned ring-down. */
  const FieldTrajectory tuned = simulate_trajectory(config.params, calib.tuned);
  const FieldTrajectory raw = simulate_trajectory(config.params, config.envelope);
  const Index end = calib.tuned.segment_start_step(2) + calib.tuned.steps_of(
                        calib.tuned.segments[2]);
  const double tuned_res = std::max(std::abs(tuned.alpha0(end)), std::abs(tuned.alpha1(end)));
  const double raw_res = std::max(std::abs(raw.alpha0(end)), std::abs(raw.alpha1(end)));
  CHECK(tuned_res < 1e-3 * raw_res);

  CHECK(calib.weights.w_i.size() == tuned.size());
  const double peak = std::sqrt((calib.weights.w_i.square() + calib.weights.w_q.square())
                                    .maxCoeff());
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("passive mode skips the tune-up and appends the ring-down wait") {
  ExperimentConfig config = fast_config(12);
  config.depletion_mode = DepletionMode::passive;
  config.passive_wait = 900e-9;

  const CalibrationResult calib = run_calibration(config);
  CHECK_FALSE(calib.tuneup.has_value());
  CHECK(calib.tuned.segments[1].amplitude == 0.0);
  CHECK(calib.tuned.segments[2].amplitude == 0.0);
  CHECK(calib.tuned.buffer ==
        doctest::Approx(config.envelope.buffer + config.passive_wait).epsilon(1e-12));
}

TEST_CASE("auto grid tops out at the requested dephasing exponent") {
  const ExperimentConfig config = fast_config(13);
  const CalibrationResult calib = run_calibration(config);
  const std::vector<double> grid = resolve_eps_grid(config, calib);

  REQUIRE(static_cast<int>(grid.size()) == config.grid_points);
  CHECK(grid.front() == 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

  /* Dephasing grows as the square of the drive, so the top of the grid must
   * land on gamma_max without any further simulation. */
  const PulseEnvelope top = calib.tuned.scaled(grid.back() / calib.eps_ref);
  const double gamma =
      dephasing_exponent(simulate_trajectory(config.params, top), config.params.chi);
  CHECK(gamma == doctest::Approx(config.gamma_max).epsilon(1e-6));
}

TEST_CASE("an explicit epsilon grid is used unchanged") {
  ExperimentConfig config = fast_config(14);
  config.eps_grid = {0.0, 0.3 * EPS0, 0.6 * EPS0, 0.9 * EPS0, 1.2 * EPS0};
  const CalibrationResult calib = run_calibration(config);
  CHECK(resolve_eps_grid(config, calib) == config.eps_grid);
}

TEST_CASE("closed loop recovers the injected efficiency") {
  const EtaReport report = run_extraction(fast_config(2027));

  CHECK(report.eps_ref == doctest::Approx(EPS0));
  CHECK(static_cast<int>(report.coherence.size()) == 9);
  CHECK(static_cast<int>(report.snr.size()) == 8);
  CHECK(report.extraction.eta_err > 0.0);
  CHECK(report.extraction.eta_err < 0.05);
  CHECK(std::abs(report.extraction.eta_e - 0.165) < 3.0 * report.extraction.eta_err + 0.01);
}

TEST_CASE("reduced ramsey contrast does not bias the extraction") {
  ExperimentConfig config = fast_config(2028);
  config.ramsey_contrast = 0.8;
  const EtaReport report = run_extraction(config);

  /* The zero-drive fringe amplitude reflects the baseline contrast while the
   * eta estimate, which uses the ratio to that baseline, stays unbiased. */
  CHECK(report.coherence.front().rho01 == doctest::Approx(0.4).epsilon(0.05));
  CHECK(std::abs(report.extraction.eta_e - 0.165) < 3.0 * report.extraction.eta_err + 0.01);
}

TEST_CASE("extraction is deterministic for a fixed seed") {
  const EtaReport a = run_extraction(fast_config(31));
  const EtaReport b = run_extraction(fast_config(31));
  CHECK(io::report_to_json_text(a) == io::report_to_json_text(b));

  const EtaReport c = run_extraction(fast_config(32));
  CHECK(c.extraction.eta_e != a.extraction.eta_e);
}

TEST_CASE("detuning sweep covers every requested condition") {
  ExperimentConfig config = fast_config(41);
  config.grid_points = 7;
  config.histogram_shots = 1 << 10;
  config.ramsey_shots = 1 << 8;
  config.ramsey_phases = 16;
  config.delta_list = {-0.25 * KAPPA, 0.0, 0.25 * KAPPA};
  config.conditions = {{WeightKind::optimal, DepletionMode::active},
                       {WeightKind::square, DepletionMode::passive}};

  const DetuningSweepResult sweep = run_detuning_sweep(config);
  REQUIRE(sweep.rows.size() == 6);
  int ok_count = 0;
  for (const DetuningConditionResult& row : sweep.rows) {
    if (row.ok) {
      ++ok_count;
      CHECK(row.error.empty());
      CHECK(row.eta_e > 0.0);
      CHECK(row.eta_err > 0.0);
    }
  }
  CHECK(ok_count == 6);
  CHECK(sweep.reports.size() == 6);

  /* Rows follow delta-major order and carry their own condition. */
  CHECK(sweep.rows[0].delta == doctest::Approx(-0.25 * KAPPA));
  CHECK(sweep.rows[1].condition.weights == WeightKind::square);
  CHECK(sweep.rows[2].delta == doctest::Approx(0.0));
}

TEST_CASE("sweep failures are captured per condition, not thrown") {
  ExperimentConfig config = fast_config(42);
  config.grid_points = 7;
  config.histogram_shots = 1 << 10;
  config.ramsey_shots = 1 << 8;
  config.ramsey_phases = 16;
  config.conditions = {{WeightKind::optimal, DepletionMode::active}};
  /* A non-finite detuning is rejected inside the per-condition run, so that
   * row carries the error while its neighbors survive. */
  config.delta_list = {0.0, std::numeric_limits<double>::quiet_NaN(), 0.1 * KAPPA};

  const DetuningSweepResult sweep = run_detuning_sweep(config);
  REQUIRE(sweep.rows.size() == 3);
  CHECK(sweep.rows[0].ok);
  CHECK_FALSE(sweep.rows[1].ok);
  CHECK_FALSE(sweep.rows[1].error.empty());
  CHECK(sweep.rows[2].ok);
}

TEST_CASE("config validation rejects inconsistent requests") {
  ExperimentConfig missing_depletion = fast_config(1);
  missing_depletion.envelope.segments[1].depletion = false;
  CHECK_THROWS_AS(missing_depletion.validate(), InvalidInput);

  ExperimentConfig bad_grid = fast_config(1);
  bad_grid.eps_grid = {0.0, 1e6};
  CHECK_THROWS_AS(bad_grid.validate(), InvalidInput);

  ExperimentConfig bad_contrast = fast_config(1);
  bad_contrast.ramsey_contrast = 0.0;
  CHECK_THROWS_AS(bad_contrast.validate(), InvalidInput);

  ExperimentConfig bad_prep = fast_config(1);
  bad_prep.prep_error = 0.5;
  CHECK_THROWS_AS(bad_prep.validate(), InvalidInput);

  ExperimentConfig bad_shots = fast_config(1);
  bad_shots.histogram_shots = 4;
  CHECK_THROWS_AS(bad_shots.validate(), InvalidInput);
}

TEST_CASE("zero-amplitude envelopes are rejected as degenerate") {
  ExperimentConfig config = fast_config(1);
  config.envelope.segments[0].amplitude = 0.0;
  CHECK_THROWS_AS(run_calibration(config), DegenerateWeights);
}

TEST_SUITE_END();
