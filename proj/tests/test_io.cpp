#include "qeff/io.hpp"

#include "qeff/types.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

using namespace qeff;
using json = nlohmann::json;

namespace {

/* Scratch directory per test case, removed on destruction. */
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("qeff_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

PulseEnvelope sample_envelope() {
  PulseEnvelope env;
  env.sample_period = 1e-9;
  env.buffer = 200e-9;
  env.segments.push_back({600e-9, 1.25e7, 0.0, {}, false});
  env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
  env.segments.push_back({200e-9, 0.0, 0.0, {}, true});
  return env;
}

ExperimentConfig sample_config() {
  ExperimentConfig c;
  c.params.kappa = TWO_PI * 1.4e6;
  c.params.chi = TWO_PI * -52.5e3;
  c.params.eta = 0.165;
  c.envelope = sample_envelope();
  c.seed = 7;
  return c;
}

json sample_config_json() {
  return json::parse(io::experiment_config_to_json_text(sample_config()));
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("envelope survives a json round trip") {
  PulseEnvelope env = sample_envelope();
  env.segments[1].amplitude = 3.3e6;
  env.segments[1].phase = -1.25;

  const PulseEnvelope back = io::envelope_from_json_text(io::envelope_to_json_text(env));

  REQUIRE(back.segments.size() == env.segments.size());
  CHECK(back.sample_period == doctest::Approx(env.sample_period).epsilon(1e-12));
  CHECK(back.buffer == doctest::Approx(env.buffer).epsilon(1e-12));
  for (std::size_t i = 0; i < env.segments.size(); ++i) {
    CHECK(back.segments[i].duration == doctest::Approx(env.segments[i].duration).epsilon(1e-12));
    CHECK(back.segments[i].amplitude == doctest::Approx(env.segments[i].amplitude).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(back.segments[i].phase - env.segments[i].phase)) < 1e-12);
    CHECK(back.segments[i].depletion == env.segments[i].depletion);
  }
}

TEST_CASE("sampled segments round-trip as the same drive") {
  PulseEnvelope env = sample_envelope();
  PulseSegment ramp;
  ramp.duration = 100e-9;
  ramp.amplitude = 2.5e6;
  ramp.phase = 0.7;
  ramp.samples = ArrayXcd(101);
  for (Index k = 0; k < ramp.samples.size(); ++k) {
    ramp.samples(k) = Complex(k / 100.0, 0.2 * k / 100.0);
  }
  env.segments.insert(env.segments.begin(), ramp);

  const PulseEnvelope back = io::envelope_from_json_text(io::envelope_to_json_text(env));

  /* The writer folds the scale prefactor into the stored points, so the
   * parsed segment carries unit amplitude but the identical drive shape. */
  REQUIRE(back.segments[0].sampled());
  CHECK(back.segments[0].amplitude == doctest::Approx(1.0));
  REQUIRE(back.segments[0].samples.size() == ramp.samples.size());
  for (Index k = 0; k < ramp.samples.size(); ++k) {
    const Complex want = ramp.drive() * ramp.samples(k);
    const Complex got = back.segments[0].drive() * back.segments[0].samples(k);
    CHECK(std::abs(got - want) < 1e-9 * std::max(std::abs(want), 1.0));
  }
}

TEST_CASE("unknown envelope keys are rejected by name") {
  json j = json::parse(io::envelope_to_json_text(sample_envelope()));
  j["segments"][0]["ampltiude"] = 1.0;
  CHECK_THROWS_WITH_AS(io::envelope_from_json_text(j.dump()),
                       doctest::Contains("ampltiude"), InvalidInput);

  json top = json::parse(io::envelope_to_json_text(sample_envelope()));
  top["buffer_us"] = 1.0;
  CHECK_THROWS_WITH_AS(io::envelope_from_json_text(top.dump()),
                       doctest::Contains("buffer_us"), InvalidInput);
}

TEST_CASE("experiment config survives a json round trip") {
  ExperimentConfig c = sample_config();
  c.params.delta = TWO_PI * 0.25e6;
  c.params.v0 = 2.5;
  c.eps_grid = {0.0, 5e6, 1e7, 1.5e7};
  c.histogram_shots = 4096;
  c.ramsey_shots = 256;
  c.ramsey_phases = 16;
  c.ramsey_contrast = 0.93;
  c.prep_error = 0.01;
  /* Derived seeds can exceed the signed 64-bit range. */
  c.seed = 0x9e3779b97f4a7c15ULL;
  c.weight_kind = WeightKind::square;
  c.depletion_mode = DepletionMode::passive;
  c.passive_wait = 750e-9;
  c.tuneup_mode = TuneupMode::noiseless;
  c.tuneup_cost.shots = 2048;
  c.tuneup_cost.difference_weight = 5.0;
  c.delta_list = {TWO_PI * -1.4e6, 0.0, TWO_PI * 1.4e6};
  c.conditions = {{WeightKind::optimal, DepletionMode::active},
                  {WeightKind::square, DepletionMode::passive}};
  c.out_dir = "scratch";

  const ExperimentConfig back =
      io::experiment_config_from_json_text(io::experiment_config_to_json_text(c), {});

  CHECK(back.params.kappa == doctest::Approx(c.params.kappa).epsilon(1e-12));
  CHECK(back.params.chi == doctest::Approx(c.params.chi).epsilon(1e-12));
  CHECK(back.params.delta == doctest::Approx(c.params.delta).epsilon(1e-12));
  CHECK(back.params.eta == doctest::Approx(c.params.eta).epsilon(1e-12));
  CHECK(back.params.v0 == doctest::Approx(c.params.v0).epsilon(1e-12));
  REQUIRE(back.eps_grid.size() == c.eps_grid.size());
  for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
    CHECK(back.eps_grid[i] == doctest::Approx(c.eps_grid[i]).epsilon(1e-12));
  }
  CHECK(back.histogram_shots == c.histogram_shots);
  CHECK(back.ramsey_shots == c.ramsey_shots);
  CHECK(back.ramsey_phases == c.ramsey_phases);
  CHECK(back.ramsey_contrast == doctest::Approx(c.ramsey_contrast).epsilon(1e-12));
  CHECK(back.prep_error == doctest::Approx(c.prep_error).epsilon(1e-12));
  CHECK(back.seed == c.seed);
  CHECK(back.weight_kind == c.weight_kind);
  CHECK(back.depletion_mode == c.depletion_mode);
  CHECK(back.passive_wait == doctest::Approx(c.passive_wait).epsilon(1e-12));
  CHECK(back.tuneup_mode == c.tuneup_mode);
  CHECK(back.tuneup_cost.shots == c.tuneup_cost.shots);
  CHECK(back.tuneup_cost.difference_weight ==
        doctest::Approx(c.tuneup_cost.difference_weight).epsilon(1e-12));
  REQUIRE(back.delta_list.size() == c.delta_list.size());
  for (std::size_t i = 0; i < c.delta_list.size(); ++i) {
    CHECK(back.delta_list[i] == doctest::Approx(c.delta_list[i]).epsilon(1e-12).scale(1.0));
  }
  REQUIRE(back.conditions.size() == c.conditions.size());
  for (std::size_t i = 0; i < c.conditions.size(); ++i) {
    CHECK(back.conditions[i].weights == c.conditions[i].weights);
    CHECK(back.conditions[i].depletion == c.conditions[i].depletion);
  }
  CHECK(back.out_dir == c.out_dir);
}

TEST_CASE("config rejects unknown keys by name") {
  json j = sample_config_json();
  j["sede"] = 1;
  CHECK_THROWS_WITH_AS(io::experiment_config_from_json_text(j.dump(), {}),
                       doctest::Contains("sede"), InvalidInput);

  json r = sample_config_json();
  r["readout"]["kappa_hz"] = 1.0;
  CHECK_THROWS_WITH_AS(io::experiment_config_from_json_text(r.dump(), {}),
                       doctest::Contains("kappa_hz"), InvalidInput);
}

TEST_CASE("config requires an explicit seed") {
  json j = sample_config_json();
  j.erase("seed");
  CHECK_THROWS_WITH_AS(io::experiment_config_from_json_text(j.dump(), {}),
                       doctest::Contains("seed"), InvalidInput);

  json neg = sample_config_json();
  neg["seed"] = -3;
  CHECK_THROWS_AS(io::experiment_config_from_json_text(neg.dump(), {}), InvalidInput);

  json frac = sample_config_json();
  frac["seed"] = 1.5;
  CHECK_THROWS_AS(io::experiment_config_from_json_text(frac.dump(), {}), InvalidInput);
}

TEST_CASE("config takes exactly one envelope source") {
  json both = sample_config_json();
  both["envelope_file"] = "pulse.json";
  CHECK_THROWS_AS(io::experiment_config_from_json_text(both.dump(), {}), InvalidInput);

  json neither = sample_config_json();
  neither.erase("envelope");
  CHECK_THROWS_AS(io::experiment_config_from_json_text(neither.dump(), {}), InvalidInput);
}

TEST_CASE("envelope_file is resolved relative to the config directory") {
  TempDir tmp;
  io::write_envelope(tmp.path / "pulse.json", sample_envelope());
  json j = sample_config_json();
  j.erase("envelope");
  j["envelope_file"] = "pulse.json";
  io::write_text_file(tmp.path / "config.json", j.dump());

  const ExperimentConfig c = io::read_experiment_config(tmp.path / "config.json");
  CHECK(c.envelope.segments.size() == 3);
  CHECK(c.envelope_path == (tmp.path / "pulse.json").string());
}

TEST_CASE("config rejects contradictory grid and depletion settings") {
  json grids = sample_config_json();
  grids["epsilon_grid"] = {0.0, 1e6, 2e6, 3e6};
  grids["auto_grid"] = {{"points", 9}};
  CHECK_THROWS_AS(io::experiment_config_from_json_text(grids.dump(), {}), InvalidInput);

  json wait = sample_config_json();
  wait["depletion"] = {{"mode", "active"}, {"wait_ns", 500.0}};
  CHECK_THROWS_WITH_AS(io::experiment_config_from_json_text(wait.dump(), {}),
                       doctest::Contains("wait_ns"), InvalidInput);
}

TEST_CASE("chain csv round trip preserves the points") {
  TempDir tmp;
  const std::vector<GainEtaPoint> points = {
      {0.0, 0.167, 0.004}, {10.0, 0.095, 0.003}, {20.6, 0.041, 0.002}};
  io::write_chain_csv(tmp.path / "chain.csv", points);
  const std::vector<GainEtaPoint> back = io::read_chain_csv(tmp.path / "chain.csv");

  REQUIRE(back.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(back[i].gain_db == doctest::Approx(points[i].gain_db).epsilon(1e-12));
    CHECK(back[i].eta_e == doctest::Approx(points[i].eta_e).epsilon(1e-12));
    CHECK(back[i].eta_err == doctest::Approx(points[i].eta_err).epsilon(1e-12));
  }
}

TEST_CASE("chain csv errors name the offending line") {
  TempDir tmp;
  io::write_text_file(tmp.path / "bad.csv",
                      "gain_db,eta_e,eta_err\n0.0,0.167,0.004\n10.0,oops,0.003\n");
  CHECK_THROWS_WITH_AS(io::read_chain_csv(tmp.path / "bad.csv"), doctest::Contains(":3:"),
                       io::IoError);

  io::write_text_file(tmp.path / "short.csv", "gain_db,eta_e,eta_err\n1.0,0.1\n");
  CHECK_THROWS_WITH_AS(io::read_chain_csv(tmp.path / "short.csv"), doctest::Contains(":2:"),
                       io::IoError);

  io::write_text_file(tmp.path / "header.csv", "gain,eta,err\n1.0,0.1,0.01\n");
  CHECK_THROWS_WITH_AS(io::read_chain_csv(tmp.path / "header.csv"), doctest::Contains(":1:"),
                       io::IoError);

  io::write_text_file(tmp.path / "empty.csv", "");
  CHECK_THROWS_AS(io::read_chain_csv(tmp.path / "empty.csv"), io::IoError);
}

TEST_CASE("missing files raise io errors, not config errors") {
  CHECK_THROWS_AS(io::read_text_file("/nonexistent/qeff/nowhere.json"), io::IoError);
  CHECK_THROWS_AS(io::read_chain_csv("/nonexistent/qeff/nowhere.csv"), io::IoError);
}

TEST_CASE("chain fit json round trip") {
  ChainFit fit;
  fit.params.eta_pre = 0.22;
  fit.params.insertion_loss_db = 4.6;
  fit.params.t_noise = 2.6;
  fit.params.freq = 7.8524e9;
  fit.params.n_sections = 200;
  fit.chi2 = 37.5;
  fit.dof = 38;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) fit.covariance(i, k) = 0.01 * (i + 1) * (k + 1);
  }

  const ChainFit back = io::chain_fit_from_json_text(io::chain_fit_to_json_text(fit));
  CHECK(back.params.eta_pre == doctest::Approx(fit.params.eta_pre).epsilon(1e-12));
  CHECK(back.params.insertion_loss_db ==
        doctest::Approx(fit.params.insertion_loss_db).epsilon(1e-12));
  CHECK(back.params.t_noise == doctest::Approx(fit.params.t_noise).epsilon(1e-12));
  CHECK(back.params.freq == doctest::Approx(fit.params.freq).epsilon(1e-12));
  CHECK(back.params.n_sections == fit.params.n_sections);
  CHECK(back.chi2 == doctest::Approx(fit.chi2).epsilon(1e-12));
  CHECK(back.dof == fit.dof);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(back.covariance(i, k) == doctest::Approx(fit.covariance(i, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("depletion json reports amplitudes relative to the reference drive") {
  DepletionResult result;
  result.params = {2.5e6, 5.0e6, 0.4, -1.1};
  result.cost = 1.25e-4;
  result.evaluations = 123;
  result.converged = true;

  const json j = json::parse(io::depletion_to_json_text(result, 1.25e7));
  CHECK(j.at("params").at("eps_d0").get<double>() == doctest::Approx(2.5e6));
  CHECK(j.at("params").at("eps_d0_rel").get<double>() == doctest::Approx(0.2));
  CHECK(j.at("params").at("eps_d1_rel").get<double>() == doctest::Approx(0.4));
  CHECK(j.at("eps_ref").get<double>() == doctest::Approx(1.25e7));
  CHECK(j.at("converged").get<bool>() == true);
}

TEST_CASE("text files are created with parent directories") {
  TempDir tmp;
  const std::filesystem::path nested = tmp.path / "a" / "b" / "c.txt";
  io::write_text_file(nested, "payload\n");
  CHECK(io::read_text_file(nested) == "payload\n");
}

TEST_SUITE_END();
