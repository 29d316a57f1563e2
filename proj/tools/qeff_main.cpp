#include "qeff/commands.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <string>

namespace {

struct ConfigArgs {
  std::string config_path;
  qeff::cmd::CliOverrides overrides;
};

void add_config_options(CLI::App* sub, ConfigArgs& args) {
  sub->add_option("--config", args.config_path, "experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", args.overrides.seed, "override the config seed");
  sub->add_option("--out", args.overrides.out_dir, "override the output directory");
  sub->add_option("--shots", args.overrides.shots, "override histogram shots per state");
  sub->add_option("--mode", args.overrides.mode, "depletion tune-up mode: noiseless | mc");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive-readout quantum-efficiency toolkit: simulate homodyne records, "
               "tune photon depletion, and extract eta with the three-step method."};
  app.require_subcommand(1);

  int rc = qeff::cmd::EXIT_OK;
  const auto dispatch = [&rc](std::function<int()> body) {
    rc = qeff::cmd::run_protected(body);
  };

  ConfigArgs calib_args;
  CLI::App* calib = app.add_subcommand(
      "calibrate-weights", "tune depletion and write integration weights + transients");
  add_config_options(calib, calib_args);
  calib->callback([&] {
    dispatch([&] {
      return qeff::cmd::calibrate_weights(
          qeff::cmd::load_config(calib_args.config_path, calib_args.overrides));
    });
  });

  ConfigArgs extract_args;
  CLI::App* extract =
      app.add_subcommand("extract-eta", "run the full three-step eta extraction");
  add_config_options(extract, extract_args);
  extract->callback([&] {
    dispatch([&] {
      return qeff::cmd::extract_eta(
          qeff::cmd::load_config(extract_args.config_path, extract_args.overrides));
    });
  });

  ConfigArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep-detuning", "re-tune and extract eta per detuning and condition");
  add_config_options(sweep, sweep_args);
  sweep->callback([&] {
    dispatch([&] {
      return qeff::cmd::sweep_detuning(
          qeff::cmd::load_config(sweep_args.config_path, sweep_args.overrides));
    });
  });

  ConfigArgs tune_args;
  CLI::App* tune = app.add_subcommand(
      "optimize-depletion", "tune the two depletion drives and write the trace");
  add_config_options(tune, tune_args);
  tune->callback([&] {
    dispatch([&] {
      return qeff::cmd::optimize_depletion_cmd(
          qeff::cmd::load_config(tune_args.config_path, tune_args.overrides));
    });
  });

  std::string chain_csv;
  double chain_freq_ghz = 7.8524;
  int chain_sections = 100;
  std::string chain_out = "out";
  CLI::App* chain = app.add_subcommand(
      "fit-chain", "fit the three-stage efficiency model to (gain, eta) data");
  chain->add_option("--csv", chain_csv, "CSV with header gain_db,eta_e,eta_err")->required();
  chain->add_option("--freq-ghz", chain_freq_ghz, "signal frequency in GHz");
  chain->add_option("--n-sections", chain_sections, "distributed-model sections");
  chain->add_option("--out", chain_out, "output directory");
  chain->callback([&] {
    dispatch([&] {
      return qeff::cmd::fit_chain_cmd(chain_csv, chain_freq_ghz * 1e9, chain_sections, chain_out);
    });
  });

  std::uint64_t selftest_seed = 1;
  CLI::App* self = app.add_subcommand("selftest", "fast internal consistency checks");
  self->add_option("--seed", selftest_seed, "seed for the Monte-Carlo checks");
  self->callback([&] { dispatch([&] { return qeff::cmd::selftest(selftest_seed); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? qeff::cmd::EXIT_OK : qeff::cmd::EXIT_CONFIG;
  }
  return rc;
}
