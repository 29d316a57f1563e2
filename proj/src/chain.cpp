#include "qeff/chain.hpp"

#include "qeff/levmar.hpp"
#include "qeff/types.hpp"

#include <cmath>

namespace qeff {

namespace {

constexpr double K_BOLTZMANN = 1.380649e-23;  // J/K
constexpr double H_PLANCK = 6.62607015e-34;   // J s

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Input-referred added noise (quanta) of n alternating gain/loss slices with
// total power gain g_total and total transmission 1/l_total.
double added_noise_quanta(double g_total, double l_total, int n) {
  const double g = std::pow(g_total * l_total, 1.0 / n);
  const double l = std::pow(1.0 / l_total, 1.0 / n);
  double gain_before = 1.0;
  double quanta = 0.0;
  for (int i = 0; i < n; ++i) {
    quanta += (g - 1.0) / (2.0 * gain_before);
    gain_before *= g * l;
    quanta += (1.0 - l) / (2.0 * gain_before);
  }
  return quanta;
}

}  // namespace

double eta_twpa_distributed(double gain_db, double loss_db, int n_sections) {
  if (gain_db < 0.0) throw InvalidInput("amplifier gain must be >= 0 dB");
  if (loss_db < 0.0) throw InvalidInput("insertion loss must be >= 0 dB");
  if (n_sections < 1) throw InvalidInput("need at least one amplifier section");
  const double g_total = db_to_linear(gain_db);
  const double l_total = db_to_linear(loss_db);
  const double a_ideal = added_noise_quanta(g_total, 1.0, n_sections);
  const double a_lossy = added_noise_quanta(g_total, l_total, n_sections);
  return (0.5 + a_ideal) / (0.5 + a_lossy);
}

double eta_post(double gain_db, double t_noise, double freq) {
  if (t_noise < 0.0) throw InvalidInput("noise temperature must be >= 0");
  if (!(freq > 0.0)) throw InvalidInput("frequency must be positive");
  const double g = db_to_linear(gain_db);
  return 1.0 / (1.0 + 2.0 * K_BOLTZMANN * t_noise / (H_PLANCK * freq * g));
}

double eta_chain(const ChainParams& p, double gain_db) {
  if (!(p.eta_pre > 0.0) || p.eta_pre > 1.0) throw InvalidInput("eta_pre must lie in (0, 1]");
  return p.eta_pre * eta_twpa_distributed(gain_db, p.insertion_loss_db, p.n_sections) *
         eta_post(gain_db, p.t_noise, p.freq);
}

ChainFit fit_chain(const std::vector<GainEtaPoint>& data, double freq, int n_sections) {
  if (data.size() < 4) throw InvalidInput("chain fit needs at least 4 gain points");
  if (!(freq > 0.0)) throw InvalidInput("frequency must be positive");

  double err_scale = 0.0;
  for (const auto& d : data) err_scale = std::max(err_scale, d.eta_e);
  if (!(err_scale > 0.0)) throw InvalidInput("all efficiencies are zero");
  const double err_floor = 1e-4 * err_scale;

  const auto residuals = [&](const Eigen::VectorXd& x) {
    ChainParams p;
    p.eta_pre = x(0);
    p.insertion_loss_db = x(1);
    p.t_noise = x(2);
    p.freq = freq;
    p.n_sections = n_sections;
    Eigen::VectorXd r(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      r(i) = (eta_chain(p, data[i].gain_db) - data[i].eta_e) /
             std::max(data[i].eta_err, err_floor);
    }
    return r;
  };

  Eigen::VectorXd lower(3), upper(3);
  lower << 1e-4, 0.0, 0.0;
  upper << 1.0, 40.0, 100.0;

  const double starts[8][3] = {{0.1, 2.0, 2.0},  {0.3, 2.0, 5.0},  {0.5, 5.0, 2.0},
                               {0.8, 5.0, 8.0},  {0.2, 8.0, 3.0},  {0.6, 1.0, 1.0},
                               {0.9, 10.0, 15.0}, {0.4, 4.0, 4.0}};

  bool have_best = false;
  LevMarResult best;
  for (const auto& s : starts) {
    Eigen::VectorXd x0(3);
    x0 << s[0], s[1], s[2];
    LevMarResult lm;
    try {
      lm = levenberg_marquardt(residuals, x0, {}, lower, upper);
    } catch (const InvalidInput&) {
      continue;
    }
    if (!lm.converged) continue;
    if (!have_best || lm.chi2 < best.chi2) {
      best = lm;
      have_best = true;
    }
  }
  if (!have_best) throw FitFailure("chain fit did not converge from any starting point");

  ChainFit fit;
  fit.params.eta_pre = best.x(0);
  fit.params.insertion_loss_db = best.x(1);
  fit.params.t_noise = best.x(2);
  fit.params.freq = freq;
  fit.params.n_sections = n_sections;
  fit.chi2 = best.chi2;
  fit.dof = static_cast<int>(data.size()) - 3;
  fit.covariance = best.covariance;
  return fit;
}

}  // namespace qeff
