#include "qeff/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace qeff::io {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

void require_object(const json& j, const std::string& context) {
  if (!j.is_object()) throw InvalidInput(context + " must be a JSON object");
}

/* Silent typos would invalidate a reproduction, so every object is checked
 * against its full key list and unknown keys are rejected by name. */
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw InvalidInput("unknown key \"" + item.key() + "\" in " + context);
  }
}

double get_number(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw InvalidInput(context + " is missing required key \"" + key + "\"");
  if (!j.at(key).is_number()) throw InvalidInput(context + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double get_number_or(const json& j, const char* key, const std::string& context, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InvalidInput(context + "." + key + " must be a number");
  return j.at(key).get<double>();
}

int get_int_or(const json& j, const char* key, const std::string& context, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw InvalidInput(context + "." + key + " must be an integer");
  }
  return j.at(key).get<int>();
}

bool get_bool_or(const json& j, const char* key, const std::string& context, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw InvalidInput(context + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw InvalidInput(context + " is missing required key \"" + key + "\"");
  if (!j.at(key).is_string()) throw InvalidInput(context + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

PulseEnvelope envelope_from_json(const json& j) {
  require_object(j, "envelope");
  check_keys(j, {"sample_period_ns", "buffer_ns", "segments"}, "envelope");

  PulseEnvelope env;
  env.sample_period = get_number_or(j, "sample_period_ns", "envelope", 1.0) * 1e-9;
  env.buffer = get_number_or(j, "buffer_ns", "envelope", 0.0) * 1e-9;
  if (!j.contains("segments") || !j.at("segments").is_array()) {
    throw InvalidInput("envelope.segments must be an array");
  }

  std::size_t index = 0;
  for (const json& js : j.at("segments")) {
    const std::string context = "envelope.segments[" + std::to_string(index) + "]";
    require_object(js, context);
    PulseSegment seg;
    seg.duration = get_number(js, "duration_ns", context) * 1e-9;
    seg.depletion = get_bool_or(js, "depletion", context, false);
    if (js.contains("samples")) {
      check_keys(js, {"duration_ns", "samples", "depletion"}, context);
      const json& arr = js.at("samples");
      if (!arr.is_array() || arr.empty()) {
        throw InvalidInput(context + ".samples must be a non-empty array of [re, im] pairs");
      }
      seg.amplitude = 1.0;
      seg.samples.resize(static_cast<Index>(arr.size()));
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const json& pt = arr[k];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          throw InvalidInput(context + ".samples[" + std::to_string(k) +
                             "] must be an [re, im] number pair");
        }
        seg.samples(static_cast<Index>(k)) = Complex(pt[0].get<double>(), pt[1].get<double>());
      }
    } else {
      check_keys(js, {"duration_ns", "amplitude", "phase_rad", "depletion"}, context);
      seg.amplitude = get_number(js, "amplitude", context);
      seg.phase = get_number_or(js, "phase_rad", context, 0.0);
    }
    env.segments.push_back(std::move(seg));
    ++index;
  }
  env.validate();
  return env;
}

json envelope_to_json(const PulseEnvelope& env) {
  json j;
  j["sample_period_ns"] = env.sample_period * 1e9;
  j["buffer_ns"] = env.buffer * 1e9;
  j["segments"] = json::array();
  for (const PulseSegment& seg : env.segments) {
    json js;
    js["duration_ns"] = seg.duration * 1e9;
    if (seg.sampled()) {
      /* The scale prefactor folds into the stored points so the file is
       * self-contained: reading it back reproduces the same drive. */
      json arr = json::array();
      for (Index k = 0; k < seg.samples.size(); ++k) {
        const Complex v = seg.drive() * seg.samples(k);
        arr.push_back({v.real(), v.imag()});
      }
      js["samples"] = std::move(arr);
    } else {
      js["amplitude"] = seg.amplitude;
      js["phase_rad"] = seg.phase;
    }
    if (seg.depletion) js["depletion"] = true;
    j["segments"].push_back(std::move(js));
  }
  return j;
}

WeightKind weight_kind_from_string(const std::string& s, const std::string& context) {
  if (s == "optimal") return WeightKind::optimal;
  if (s == "square") return WeightKind::square;
  throw InvalidInput(context + " must be \"optimal\" or \"square\", got \"" + s + "\"");
}

DepletionMode depletion_mode_from_string(const std::string& s, const std::string& context) {
  if (s == "active") return DepletionMode::active;
  if (s == "passive") return DepletionMode::passive;
  throw InvalidInput(context + " must be \"active\" or \"passive\", got \"" + s + "\"");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["readout"] = {{"kappa_over_2pi_hz", c.params.kappa / TWO_PI},
                  {"chi_over_2pi_hz", c.params.chi / TWO_PI},
                  {"delta_over_2pi_hz", c.params.delta / TWO_PI},
                  {"eta", c.params.eta},
                  {"v0", c.params.v0}};
  j["envelope"] = envelope_to_json(c.envelope);
  if (!c.envelope_path.empty()) j["envelope_source"] = c.envelope_path;
  if (!c.eps_grid.empty()) {
    j["epsilon_grid"] = c.eps_grid;
  } else {
    j["auto_grid"] = {{"points", c.grid_points}, {"gamma_max", c.gamma_max}};
  }
  j["shots"] = {{"histogram", c.histogram_shots},
                {"ramsey_per_point", c.ramsey_shots},
                {"ramsey_phases", c.ramsey_phases}};
  if (c.ramsey_contrast != 1.0) j["ramsey_contrast"] = c.ramsey_contrast;
  if (c.prep_error != 0.0) j["prep_error"] = c.prep_error;
  j["seed"] = c.seed;
  j["weights"] = weight_kind_name(c.weight_kind);
  json dep = {{"mode", depletion_mode_name(c.depletion_mode)}};
  if (c.depletion_mode == DepletionMode::passive) dep["wait_ns"] = c.passive_wait * 1e9;
  j["depletion"] = std::move(dep);
  j["tuneup"] = {{"mode", c.tuneup_mode == TuneupMode::noiseless ? "noiseless" : "monte_carlo"},
                 {"shots", c.tuneup_cost.shots},
                 {"difference_weight", c.tuneup_cost.difference_weight},
                 {"window_ns", c.tuneup_cost.window * 1e9}};
  if (!c.delta_list.empty()) {
    json sweep;
    json deltas = json::array();
    for (const double d : c.delta_list) deltas.push_back(d / TWO_PI);
    sweep["delta_over_2pi_hz"] = std::move(deltas);
    if (!c.conditions.empty()) {
      json conds = json::array();
      for (const SweepCondition& cond : c.conditions) {
        conds.push_back({{"weights", weight_kind_name(cond.weights)},
                         {"depletion", depletion_mode_name(cond.depletion)}});
      }
      sweep["conditions"] = std::move(conds);
    }
    j["sweep"] = std::move(sweep);
  }
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  require_object(j, "config");
  check_keys(j,
             {"readout", "envelope", "envelope_file", "envelope_source", "epsilon_grid",
              "auto_grid", "shots", "ramsey_contrast", "prep_error", "seed", "weights",
              "depletion", "tuneup", "sweep", "out_dir"},
             "config");

  ExperimentConfig c;

  if (!j.contains("readout")) throw InvalidInput("config is missing required key \"readout\"");
  const json& r = j.at("readout");
  require_object(r, "config.readout");
  check_keys(r, {"kappa_over_2pi_hz", "chi_over_2pi_hz", "delta_over_2pi_hz", "eta", "v0"},
             "config.readout");
  c.params.kappa = TWO_PI * get_number(r, "kappa_over_2pi_hz", "config.readout");
  c.params.chi = TWO_PI * get_number(r, "chi_over_2pi_hz", "config.readout");
  c.params.delta = TWO_PI * get_number_or(r, "delta_over_2pi_hz", "config.readout", 0.0);
  c.params.eta = get_number(r, "eta", "config.readout");
  c.params.v0 = get_number_or(r, "v0", "config.readout", 1.0);

  const bool inline_env = j.contains("envelope");
  const bool file_env = j.contains("envelope_file");
  if (inline_env == file_env) {
    throw InvalidInput("config needs exactly one of \"envelope\" (inline) or \"envelope_file\"");
  }
  if (inline_env) {
    c.envelope = envelope_from_json(j.at("envelope"));
    if (j.contains("envelope_source")) {
      c.envelope_path = get_string(j, "envelope_source", "config");
    }
  } else {
    const std::string rel = get_string(j, "envelope_file", "config");
    const std::filesystem::path path = base_dir.empty() ? std::filesystem::path(rel)
                                                        : base_dir / rel;
    c.envelope = read_envelope(path);
    c.envelope_path = path.string();
  }

  if (j.contains("epsilon_grid")) {
    const json& grid = j.at("epsilon_grid");
    if (!grid.is_array()) throw InvalidInput("config.epsilon_grid must be an array of numbers");
    for (const json& v : grid) {
      if (!v.is_number()) throw InvalidInput("config.epsilon_grid must be an array of numbers");
      c.eps_grid.push_back(v.get<double>());
    }
  }
  if (j.contains("auto_grid")) {
    if (!c.eps_grid.empty()) {
      throw InvalidInput("config cannot have both \"epsilon_grid\" and \"auto_grid\"");
    }
    const json& g = j.at("auto_grid");
    require_object(g, "config.auto_grid");
    check_keys(g, {"points", "gamma_max"}, "config.auto_grid");
    c.grid_points = get_int_or(g, "points", "config.auto_grid", c.grid_points);
    c.gamma_max = get_number_or(g, "gamma_max", "config.auto_grid", c.gamma_max);
  }

  if (j.contains("shots")) {
    const json& s = j.at("shots");
    require_object(s, "config.shots");
    check_keys(s, {"histogram", "ramsey_per_point", "ramsey_phases"}, "config.shots");
    c.histogram_shots = get_int_or(s, "histogram", "config.shots", c.histogram_shots);
    c.ramsey_shots = get_int_or(s, "ramsey_per_point", "config.shots", c.ramsey_shots);
    c.ramsey_phases = get_int_or(s, "ramsey_phases", "config.shots", c.ramsey_phases);
  }
  c.ramsey_contrast = get_number_or(j, "ramsey_contrast", "config", c.ramsey_contrast);
  c.prep_error = get_number_or(j, "prep_error", "config", c.prep_error);

  if (!j.contains("seed")) {
    throw InvalidInput("config is missing required key \"seed\" (no wall-clock defaults)");
  }
  // Non-negative parsed integers land in the unsigned slot, so this also
  // accepts derived seeds above the signed 64-bit range.
  if (!j.at("seed").is_number_unsigned()) {
    throw InvalidInput("config.seed must be a non-negative integer");
  }
  c.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("weights")) {
    c.weight_kind = weight_kind_from_string(get_string(j, "weights", "config"), "config.weights");
  }
  if (j.contains("depletion")) {
    const json& d = j.at("depletion");
    require_object(d, "config.depletion");
    check_keys(d, {"mode", "wait_ns"}, "config.depletion");
    c.depletion_mode =
        depletion_mode_from_string(get_string(d, "mode", "config.depletion"),
                                   "config.depletion.mode");
    if (c.depletion_mode == DepletionMode::passive) {
      c.passive_wait = get_number_or(d, "wait_ns", "config.depletion", 1000.0) * 1e-9;
    } else if (d.contains("wait_ns")) {
      throw InvalidInput("config.depletion.wait_ns only applies to passive mode");
    }
  }
  if (j.contains("tuneup")) {
    const json& t = j.at("tuneup");
    require_object(t, "config.tuneup");
    check_keys(t, {"mode", "shots", "difference_weight", "window_ns"}, "config.tuneup");
    if (t.contains("mode")) {
      const std::string mode = get_string(t, "mode", "config.tuneup");
      if (mode == "noiseless") {
        c.tuneup_mode = TuneupMode::noiseless;
      } else if (mode == "monte_carlo") {
        c.tuneup_mode = TuneupMode::monte_carlo;
      } else {
        throw InvalidInput("config.tuneup.mode must be \"noiseless\" or \"monte_carlo\"");
      }
    }
    c.tuneup_cost.shots = get_int_or(t, "shots", "config.tuneup", c.tuneup_cost.shots);
    c.tuneup_cost.difference_weight =
        get_number_or(t, "difference_weight", "config.tuneup", c.tuneup_cost.difference_weight);
    c.tuneup_cost.window =
        get_number_or(t, "window_ns", "config.tuneup", c.tuneup_cost.window * 1e9) * 1e-9;
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    require_object(s, "config.sweep");
    check_keys(s, {"delta_over_2pi_hz", "conditions"}, "config.sweep");
    if (!s.contains("delta_over_2pi_hz") || !s.at("delta_over_2pi_hz").is_array()) {
      throw InvalidInput("config.sweep.delta_over_2pi_hz must be an array of numbers");
    }
    for (const json& v : s.at("delta_over_2pi_hz")) {
      if (!v.is_number()) {
        throw InvalidInput("config.sweep.delta_over_2pi_hz must be an array of numbers");
      }
      c.delta_list.push_back(TWO_PI * v.get<double>());
    }
    if (s.contains("conditions")) {
      if (!s.at("conditions").is_array()) {
        throw InvalidInput("config.sweep.conditions must be an array");
      }
      std::size_t ci = 0;
      for (const json& v : s.at("conditions")) {
        const std::string context = "config.sweep.conditions[" + std::to_string(ci++) + "]";
        require_object(v, context);
        check_keys(v, {"weights", "depletion"}, context);
        SweepCondition cond;
        cond.weights = weight_kind_from_string(get_string(v, "weights", context),
                                               context + ".weights");
        cond.depletion = depletion_mode_from_string(get_string(v, "depletion", context),
                                                    context + ".depletion");
        c.conditions.push_back(cond);
      }
    }
  }
  if (j.contains("out_dir")) c.out_dir = get_string(j, "out_dir", "config");

  c.validate();
  return c;
}

json depletion_to_json(const DepletionResult& result, double eps_ref) {
  json j;
  j["params"] = {{"eps_d0", result.params.eps_d0},
                 {"phi_d0", result.params.phi_d0},
                 {"eps_d1", result.params.eps_d1},
                 {"phi_d1", result.params.phi_d1}};
  if (eps_ref > 0.0) {
    j["params"]["eps_d0_rel"] = result.params.eps_d0 / eps_ref;
    j["params"]["eps_d1_rel"] = result.params.eps_d1 / eps_ref;
    j["eps_ref"] = eps_ref;
  }
  j["cost"] = result.cost;
  j["evaluations"] = result.evaluations;
  j["converged"] = result.converged;
  return j;
}

}  // namespace

PulseEnvelope envelope_from_json_text(const std::string& text) {
  return envelope_from_json(parse_json(text, "envelope"));
}

std::string envelope_to_json_text(const PulseEnvelope& env) {
  return envelope_to_json(env).dump(2) + "\n";
}

PulseEnvelope read_envelope(const std::filesystem::path& path) {
  try {
    return envelope_from_json_text(read_text_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void write_envelope(const std::filesystem::path& path, const PulseEnvelope& env) {
  write_text_file(path, envelope_to_json_text(env));
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  try {
    return experiment_config_from_json_text(read_text_file(path), path.parent_path());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::filesystem::path& base_dir) {
  return config_from_json(parse_json(text, "config"), base_dir);
}

std::string experiment_config_to_json_text(const ExperimentConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

std::string report_to_json_text(const EtaReport& report) {
  json j;
  /* The embedded config describes the experiment, not the delivery: two runs
   * of the same measurement produce byte-identical reports wherever they are
   * written. */
  j["config"] = config_to_json(report.config);
  j["config"].erase("out_dir");
  j["tuneup"] = report.tuneup ? depletion_to_json(*report.tuneup, report.eps_ref) : json(nullptr);
  j["eps_ref"] = report.eps_ref;
  j["eps_grid"] = report.eps_grid;
  j["coherence"] = json::array();
  for (const CoherencePoint& pt : report.coherence) {
    j["coherence"].push_back({{"epsilon", pt.epsilon},
                              {"rho01", pt.rho01},
                              {"rho01_err", pt.rho01_err},
                              {"phi0", pt.phi0}});
  }
  j["snr"] = json::array();
  for (const SnrPoint& pt : report.snr) {
    j["snr"].push_back({{"epsilon", pt.epsilon}, {"snr", pt.snr}, {"snr_err", pt.snr_err}});
  }
  j["decay_fit"] = {{"b", report.decay.b},
                    {"b_err", report.decay.b_err},
                    {"sigma_m", report.decay.sigma_m},
                    {"sigma_m_err", report.decay.sigma_m_err},
                    {"chi2", report.decay.chi2},
                    {"dof", report.decay.dof}};
  j["snr_fit"] = {{"a", report.snr_fit.a},
                  {"a_err", report.snr_fit.a_err},
                  {"chi2", report.snr_fit.chi2},
                  {"dof", report.snr_fit.dof}};
  j["extraction"] = {{"a", report.extraction.a},
                     {"a_err", report.extraction.a_err},
                     {"sigma_m", report.extraction.sigma_m},
                     {"sigma_m_err", report.extraction.sigma_m_err},
                     {"b", report.extraction.b},
                     {"eta_e", report.extraction.eta_e},
                     {"eta_err", report.extraction.eta_err},
                     {"eta_injected", report.config.params.eta}};
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const EtaReport& report) {
  write_text_file(path, report_to_json_text(report));
}

std::vector<GainEtaPoint> read_chain_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  std::vector<GainEtaPoint> points;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    // Tolerate trailing carriage returns and skip blank lines.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      std::string squashed;
      for (const char ch : line) {
        if (ch != ' ') squashed.push_back(ch);
      }
      if (squashed != "gain_db,eta_e,eta_err") {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": expected header \"gain_db,eta_e,eta_err\"");
      }
      saw_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    double values[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(row, field, ',')) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 comma-separated values");
      }
      try {
        std::size_t used = 0;
        values[k] = std::stod(field, &used);
        while (used < field.size() && field[used] == ' ') ++used;
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number \"" + field +
                      "\"");
      }
    }
    if (std::getline(row, field, ',')) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected 3 comma-separated values");
    }
    points.push_back({values[0], values[1], values[2]});
  }
  if (!saw_header) throw IoError(path.string() + ": empty file, expected a CSV header");
  return points;
}

void write_chain_csv(const std::filesystem::path& path, const std::vector<GainEtaPoint>& points) {
  std::string out = "gain_db,eta_e,eta_err\n";
  for (const GainEtaPoint& pt : points) {
    out += fmt(pt.gain_db) + "," + fmt(pt.eta_e) + "," + fmt(pt.eta_err) + "\n";
  }
  write_text_file(path, out);
}

ChainFit chain_fit_from_json_text(const std::string& text) {
  const json j = parse_json(text, "chain fit");
  require_object(j, "chain fit");
  check_keys(j, {"eta_pre", "insertion_loss_db", "t_noise_k", "freq_hz", "n_sections", "chi2",
                 "dof", "covariance"},
             "chain fit");
  ChainFit fit;
  fit.params.eta_pre = get_number(j, "eta_pre", "chain fit");
  fit.params.insertion_loss_db = get_number(j, "insertion_loss_db", "chain fit");
  fit.params.t_noise = get_number(j, "t_noise_k", "chain fit");
  fit.params.freq = get_number(j, "freq_hz", "chain fit");
  fit.params.n_sections = get_int_or(j, "n_sections", "chain fit", 100);
  fit.chi2 = get_number(j, "chi2", "chain fit");
  fit.dof = get_int_or(j, "dof", "chain fit", 0);
  if (j.contains("covariance")) {
    const json& cov = j.at("covariance");
    if (!cov.is_array() || cov.size() != 3) throw InvalidInput("chain fit covariance must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (!cov[r].is_array() || cov[r].size() != 3) {
        throw InvalidInput("chain fit covariance must be 3x3");
      }
      for (int cidx = 0; cidx < 3; ++cidx) fit.covariance(r, cidx) = cov[r][cidx].get<double>();
    }
  }
  return fit;
}

std::string chain_fit_to_json_text(const ChainFit& fit) {
  json j;
  j["eta_pre"] = fit.params.eta_pre;
  j["insertion_loss_db"] = fit.params.insertion_loss_db;
  j["t_noise_k"] = fit.params.t_noise;
  j["freq_hz"] = fit.params.freq;
  j["n_sections"] = fit.params.n_sections;
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  json cov = json::array();
  for (int r = 0; r < 3; ++r) {
    cov.push_back({fit.covariance(r, 0), fit.covariance(r, 1), fit.covariance(r, 2)});
  }
  j["covariance"] = std::move(cov);
  return j.dump(2) + "\n";
}

void write_chain_fit(const std::filesystem::path& path, const ChainFit& fit) {
  write_text_file(path, chain_fit_to_json_text(fit));
}

void write_chain_curves_csv(const std::filesystem::path& path, const ChainParams& params,
                            double gain_lo_db, double gain_hi_db, int n_points) {
  if (n_points < 2) throw InvalidInput("chain curve needs at least 2 points");
  if (!(gain_hi_db > gain_lo_db)) throw InvalidInput("chain curve needs gain_hi > gain_lo");
  std::string out = "gain_db,eta_twpa,eta_post,eta_total\n";
  for (int i = 0; i < n_points; ++i) {
    const double g = gain_lo_db + (gain_hi_db - gain_lo_db) * i / (n_points - 1.0);
    const double twpa = eta_twpa_distributed(g, params.insertion_loss_db, params.n_sections);
    const double post = eta_post(g, params.t_noise, params.freq);
    out += fmt(g) + "," + fmt(twpa) + "," + fmt(post) + "," + fmt(params.eta_pre * twpa * post) +
           "\n";
  }
  write_text_file(path, out);
}

void write_trajectory_csv(const std::filesystem::path& path, const FieldTrajectory& traj) {
  std::string out = "t_ns,re_a0,im_a0,re_a1,im_a1\n";
  for (Index k = 0; k < traj.size(); ++k) {
    out += fmt(traj.times(k) * 1e9) + "," + fmt(traj.alpha0(k).real()) + "," +
           fmt(traj.alpha0(k).imag()) + "," + fmt(traj.alpha1(k).real()) + "," +
           fmt(traj.alpha1(k).imag()) + "\n";
  }
  write_text_file(path, out);
}

void write_weights_csv(const std::filesystem::path& path, const WeightFunctions& weights,
                       double sample_period) {
  std::string out = "t_ns,w_i,w_q\n";
  for (Index k = 0; k < weights.w_i.size(); ++k) {
    out += fmt(k * sample_period * 1e9) + "," + fmt(weights.w_i(k)) + "," + fmt(weights.w_q(k)) +
           "\n";
  }
  write_text_file(path, out);
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<DepletionTraceRow>& trace) {
  std::string out = "evaluation,eps_d0,phi_d0,eps_d1,phi_d1,cost\n";
  for (const DepletionTraceRow& row : trace) {
    out += std::to_string(row.evaluation) + "," + fmt(row.params.eps_d0) + "," +
           fmt(row.params.phi_d0) + "," + fmt(row.params.eps_d1) + "," + fmt(row.params.phi_d1) +
           "," + fmt(row.cost) + "\n";
  }
  write_text_file(path, out);
}

std::string depletion_to_json_text(const DepletionResult& result, double eps_ref) {
  return depletion_to_json(result, eps_ref).dump(2) + "\n";
}

void write_depletion(const std::filesystem::path& path, const DepletionResult& result,
                     double eps_ref) {
  write_text_file(path, depletion_to_json_text(result, eps_ref));
}

void write_snr_csv(const std::filesystem::path& path, const std::vector<SnrPoint>& points) {
  std::string out = "epsilon,snr,snr_err\n";
  for (const SnrPoint& pt : points) {
    out += fmt(pt.epsilon) + "," + fmt(pt.snr) + "," + fmt(pt.snr_err) + "\n";
  }
  write_text_file(path, out);
}

void write_coherence_csv(const std::filesystem::path& path,
                         const std::vector<CoherencePoint>& points) {
  std::string out = "epsilon,rho01,rho01_err,phi0\n";
  for (const CoherencePoint& pt : points) {
    out += fmt(pt.epsilon) + "," + fmt(pt.rho01) + "," + fmt(pt.rho01_err) + "," + fmt(pt.phi0) +
           "\n";
  }
  write_text_file(path, out);
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<DetuningConditionResult>& rows) {
  std::string out = "delta_over_2pi_hz,weights,depletion,eta_e,eta_err,status,detail\n";
  for (const DetuningConditionResult& row : rows) {
    std::string detail = row.error;
    for (char& ch : detail) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out += fmt(row.delta / TWO_PI) + "," + weight_kind_name(row.condition.weights) + "," +
           depletion_mode_name(row.condition.depletion) + "," + fmt(row.eta_e) + "," +
           fmt(row.eta_err) + "," + (row.ok ? "ok" : "failed") + "," + detail + "\n";
  }
  write_text_file(path, out);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace qeff::io
