#include "qeff/commands.hpp"

#include "qeff/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

namespace qeff::cmd {

namespace {

namespace fs = std::filesystem;

void apply_overrides(ExperimentConfig& config, const CliOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (o.shots) config.histogram_shots = *o.shots;
  if (o.mode) {
    if (*o.mode == "noiseless") {
      config.tuneup_mode = TuneupMode::noiseless;
    } else if (*o.mode == "mc" || *o.mode == "monte_carlo") {
      config.tuneup_mode = TuneupMode::monte_carlo;
    } else {
      throw InvalidInput("--mode must be \"noiseless\" or \"mc\", got \"" + *o.mode + "\"");
    }
  }
  config.validate();
}

void write_calibration_files(const fs::path& out, const CalibrationResult& calib) {
  io::write_trajectory_csv(out / "transients.csv", calib.trajectory);
  io::write_weights_csv(out / "weights.csv", calib.weights, calib.tuned.sample_period);
  if (calib.tuneup) {
    io::write_depletion(out / "depletion.json", *calib.tuneup, calib.eps_ref);
    io::write_trace_csv(out / "tuneup_trace.csv", calib.tuneup->trace);
  }
}

std::string report_name(std::size_t index, const DetuningConditionResult& row) {
  char head[16];
  std::snprintf(head, sizeof head, "%03zu", index);
  return std::string(head) + "_" + weight_kind_name(row.condition.weights) + "_" +
         depletion_mode_name(row.condition.depletion) + ".json";
}

}  // namespace

ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides) {
  ExperimentConfig config = io::read_experiment_config(path);
  apply_overrides(config, overrides);
  return config;
}

int calibrate_weights(const ExperimentConfig& config) {
  const CalibrationResult calib = run_calibration(config);
  write_calibration_files(config.out_dir, calib);
  std::printf("calibration done: %s weights over %lld samples, depletion %s\n",
              weight_kind_name(config.weight_kind),
              static_cast<long long>(calib.weights.w_i.size()),
              calib.tuneup ? (calib.tuneup->converged ? "tuned" : "tuned (eval cap)")
                           : "passive");
  if (calib.tuneup) {
    std::printf("  depletion: eps_d0/eps = %.4f  eps_d1/eps = %.4f  cost = %.3e  (%d evals)\n",
                calib.tuneup->params.eps_d0 / calib.eps_ref,
                calib.tuneup->params.eps_d1 / calib.eps_ref, calib.tuneup->cost,
                calib.tuneup->evaluations);
  }
  std::printf("  wrote %s/{transients.csv,weights.csv%s}\n", config.out_dir.c_str(),
              calib.tuneup ? ",depletion.json,tuneup_trace.csv" : "");
  return EXIT_OK;
}

int extract_eta(const ExperimentConfig& config) {
  const EtaReport report = run_extraction(config);
  const fs::path out = config.out_dir;
  io::write_report(out / "report.json", report);
  io::write_coherence_csv(out / "coherence.csv", report.coherence);
  io::write_snr_csv(out / "snr.csv", report.snr);
  if (report.tuneup) {
    io::write_depletion(out / "depletion.json", *report.tuneup, report.eps_ref);
    io::write_trace_csv(out / "tuneup_trace.csv", report.tuneup->trace);
  }
  std::printf("eta_e = %.4f +- %.4f  (injected %.4f)\n", report.extraction.eta_e,
              report.extraction.eta_err, config.params.eta);
  std::printf("  a = %.4g +- %.2g  sigma_m = %.4g +- %.2g  b = %.3f\n", report.extraction.a,
              report.extraction.a_err, report.extraction.sigma_m, report.extraction.sigma_m_err,
              report.extraction.b);
  std::printf("  wrote %s/{report.json,coherence.csv,snr.csv%s}\n", config.out_dir.c_str(),
              report.tuneup ? ",depletion.json,tuneup_trace.csv" : "");
  return EXIT_OK;
}

int sweep_detuning(const ExperimentConfig& config) {
  const DetuningSweepResult sweep = run_detuning_sweep(config);
  const fs::path out = config.out_dir;
  io::write_sweep_csv(out / "sweep.csv", sweep.rows);

  std::size_t report_idx = 0;
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const DetuningConditionResult& row = sweep.rows[i];
    if (row.ok) {
      io::write_report(out / "reports" / report_name(i, row), sweep.reports[report_idx]);
      ++report_idx;
      std::printf("delta/2pi = %+.3e Hz  %-7s %-7s  eta_e = %.4f +- %.4f\n", row.delta / TWO_PI,
                  weight_kind_name(row.condition.weights),
                  depletion_mode_name(row.condition.depletion), row.eta_e, row.eta_err);
    } else {
      std::printf("delta/2pi = %+.3e Hz  %-7s %-7s  FAILED: %s\n", row.delta / TWO_PI,
                  weight_kind_name(row.condition.weights),
                  depletion_mode_name(row.condition.depletion), row.error.c_str());
    }
  }
  std::printf("  wrote %s/sweep.csv and %zu reports\n", config.out_dir.c_str(), report_idx);
  return EXIT_OK;
}

int optimize_depletion_cmd(const ExperimentConfig& config) {
  ExperimentConfig local = config;
  local.depletion_mode = DepletionMode::active;
  local.validate();
  const CalibrationResult calib = run_calibration(local);
  const fs::path out = config.out_dir;
  io::write_depletion(out / "depletion.json", *calib.tuneup, calib.eps_ref);
  io::write_trace_csv(out / "tuneup_trace.csv", calib.tuneup->trace);
  const DepletionParams& dp = calib.tuneup->params;
  std::printf("depletion tuned in %d evaluations (%s), cost %.6e\n", calib.tuneup->evaluations,
              calib.tuneup->converged ? "converged" : "eval cap", calib.tuneup->cost);
  std::printf("  eps_d0 = %.6e rad/s (%.4f eps_ref)  phi_d0 = %+.4f rad\n", dp.eps_d0,
              dp.eps_d0 / calib.eps_ref, dp.phi_d0);
  std::printf("  eps_d1 = %.6e rad/s (%.4f eps_ref)  phi_d1 = %+.4f rad\n", dp.eps_d1,
              dp.eps_d1 / calib.eps_ref, dp.phi_d1);
  std::printf("  wrote %s/{depletion.json,tuneup_trace.csv}\n", config.out_dir.c_str());
  return EXIT_OK;
}

int fit_chain_cmd(const std::string& csv_path, double freq, int n_sections,
                  const std::string& out_dir) {
  const std::vector<GainEtaPoint> data = io::read_chain_csv(csv_path);
  const ChainFit fit = fit_chain(data, freq, n_sections);

  double lo = data.front().gain_db, hi = data.front().gain_db;
  for (const GainEtaPoint& pt : data) {
    lo = std::min(lo, pt.gain_db);
    hi = std::max(hi, pt.gain_db);
  }

  const fs::path out = out_dir;
  io::write_chain_fit(out / "chain_fit.json", fit);
  io::write_chain_curves_csv(out / "chain_curves.csv", fit.params, lo, hi, 101);
  std::printf("chain fit over %zu points: eta_pre = %.4f  L = %.3f dB  T_N = %.3f K  "
              "(chi2/dof = %.2f)\n",
              data.size(), fit.params.eta_pre, fit.params.insertion_loss_db, fit.params.t_noise,
              fit.chi2 / std::max(fit.dof, 1));
  std::printf("  wrote %s/{chain_fit.json,chain_curves.csv}\n", out_dir.c_str());
  return EXIT_OK;
}

int selftest(std::uint64_t seed) {
  int failures = 0;
  const auto check = [&](const char* name, bool ok) {
    std::printf("%-58s %s\n", name, ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
  };

  ReadoutParams p;
  p.kappa = TWO_PI * 1.4e6;
  p.chi = -TWO_PI * 52.5e3;
  p.eta = 0.165;
  p.v0 = 1.0;

  const double eps0 = 1.25e7;
  const auto make_env = [&](double dt) {
    PulseEnvelope env;
    env.sample_period = dt;
    env.segments.push_back({600e-9, eps0, 0.0, {}, false});
    env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
    env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
    env.buffer = 200e-9;
    return env;
  };

  // Analytic identity eta = SNR^2 / (4 Gamma_m) with solved depletion.
  double worst_identity = 0.0;
  double worst_null = 0.0;
  for (const double delta : {0.0, 0.7 * TWO_PI * 1.4e6, -0.7 * TWO_PI * 1.4e6}) {
    ReadoutParams pd = p;
    pd.delta = delta;
    PulseEnvelope env = make_env(0.25e-9);
    const auto [d0, d1] = solve_depletion(pd, env, {1, 2});
    env = with_depletion_drives(env, {1, 2}, d0, d1);
    const FieldTrajectory traj = simulate_trajectory(pd, env);

    const double snr = analytic_snr_optimal(traj, pd);
    const double gamma = dephasing_exponent(traj, pd.chi);
    worst_identity = std::max(worst_identity,
                              std::abs(snr * snr / (4.0 * gamma) - pd.eta) / pd.eta);

    const double peak = traj.alpha0.abs().maxCoeff();
    const Index last = traj.size() - 1;
    worst_null = std::max(worst_null, std::abs(traj.alpha0(last)) / peak);
    worst_null = std::max(worst_null, std::abs(traj.alpha1(last)) / peak);

    const WeightFunctions w = optimal_weights(traj);
    const double via_weights = analytic_snr(traj, pd, w);
    worst_identity = std::max(worst_identity, std::abs(via_weights - snr) / snr);
  }
  check("identity eta = SNR^2/(4 Gamma_m), 3 detunings, < 1e-5", worst_identity < 1e-5);
  check("solved depletion nulls both pointer states, < 1e-6", worst_null < 1e-6);

  // Small closed loop: full Monte-Carlo pipeline at reduced statistics.
  ExperimentConfig cfg;
  cfg.params = p;
  cfg.envelope = make_env(1e-9);
  cfg.grid_points = 9;
  cfg.histogram_shots = 1 << 10;
  cfg.ramsey_shots = 1 << 9;
  cfg.ramsey_phases = 24;
  cfg.seed = seed;
  cfg.tuneup_mode = TuneupMode::noiseless;
  const EtaReport report = run_extraction(cfg);
  const double dev = std::abs(report.extraction.eta_e - p.eta);
  std::printf("  closed loop: eta_e = %.4f +- %.4f (injected %.4f)\n", report.extraction.eta_e,
              report.extraction.eta_err, p.eta);
  check("closed-loop extraction within 0.05 of injected eta", dev < 0.05);
  check("closed-loop error bar sane (0 < err < 0.05)",
        report.extraction.eta_err > 0.0 && report.extraction.eta_err < 0.05);

  std::printf("%s\n", failures == 0 ? "selftest: all checks passed" : "selftest: FAILURES");
  return failures == 0 ? EXIT_OK : EXIT_INTERNAL;
}

int run_protected(const std::function<int()>& body) {
  try {
    return body();
  } catch (const io::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return EXIT_IO;
  } catch (const FitFailure& e) {
    std::fprintf(stderr, "fit error: %s\n", e.what());
    return EXIT_FIT;
  } catch (const DegenerateWeights& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return EXIT_SIMULATION;
  } catch (const SingularSystem& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return EXIT_SIMULATION;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return EXIT_CONFIG;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return EXIT_INTERNAL;
  }
}

}  // namespace qeff::cmd
