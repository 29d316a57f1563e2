#include "qeff/homodyne.hpp"

#include <algorithm>
#include <cmath>

namespace qeff {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (const std::uint64_t tag : tags) {
    state ^= tag;
    out = splitmix64(state);
  }
  return out;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ stream;
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state) >> 32),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state) >> 32)};
  return std::mt19937_64(seq);
}

ShotRecord mean_record(const ArrayXcd& alpha, const ReadoutParams& p) {
  const double gain = p.v0 * std::sqrt(2.0 * p.kappa * p.eta);
  ShotRecord rec;
  rec.v_i = gain * alpha.real();
  rec.v_q = gain * alpha.imag();
  return rec;
}

ShotRecord generate_record(const ArrayXcd& alpha, const ReadoutParams& p, double dt,
                           std::uint64_t seed, std::uint64_t shot_index) {
  if (!(dt > 0.0)) throw InvalidInput("record sample period must be positive");
  const Index n = alpha.size();
  if (n < 2) throw InvalidInput("record needs at least two samples");
  ShotRecord rec = mean_record(alpha, p);
  const double noise_scale = p.v0 / std::sqrt(dt);
  std::mt19937_64 rng = stream_rng(seed, shot_index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index k = 0; k < n; ++k) rec.v_i(k) += noise_scale * gauss(rng);
  for (Index k = 0; k < n; ++k) rec.v_q(k) += noise_scale * gauss(rng);
  return rec;
}

double integrate_shot(const ShotRecord& rec, const WeightFunctions& w, double dt) {
  if (rec.v_i.size() != w.w_i.size() || rec.v_q.size() != w.w_q.size()) {
    throw InvalidInput("record and weight functions live on different grids");
  }
  const ArrayXd integrand = w.w_i * rec.v_i + w.w_q * rec.v_q;
  return trapezoid(integrand, dt);
}

ShotRecord average_record(const ArrayXcd& alpha, const ReadoutParams& p, double dt, int n_shots,
                          std::uint64_t seed) {
  if (n_shots < 1) throw InvalidInput("averaging needs at least one shot");
  ShotRecord mean;
  mean.v_i = ArrayXd::Zero(alpha.size());
  mean.v_q = ArrayXd::Zero(alpha.size());
  for (int i = 0; i < n_shots; ++i) {
    const ShotRecord rec = generate_record(alpha, p, dt, seed, static_cast<std::uint64_t>(i));
    mean.v_i += rec.v_i;
    mean.v_q += rec.v_q;
  }
  mean.v_i /= n_shots;
  mean.v_q /= n_shots;
  return mean;
}

ArrayXd simulate_integrated_shots(const FieldTrajectory& traj, const ReadoutParams& p,
                                  const WeightFunctions& w, QubitState prepared, int n_shots,
                                  std::uint64_t seed, std::uint64_t stream_offset,
                                  double prep_error) {
  if (n_shots < 1) throw InvalidInput("shot count must be positive");
  if (prep_error < 0.0 || prep_error >= 1.0) throw InvalidInput("prep_error must lie in [0, 1)");
  const double dt = traj.sample_period();
  const ArrayXcd& primary = (prepared == QubitState::ground) ? traj.alpha0 : traj.alpha1;
  const ArrayXcd& flipped = (prepared == QubitState::ground) ? traj.alpha1 : traj.alpha0;

  ArrayXd out(n_shots);
  for (int i = 0; i < n_shots; ++i) {
    const std::uint64_t stream = stream_offset + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng = stream_rng(seed, stream);
    const ArrayXcd* alpha = &primary;
    if (prep_error > 0.0) {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      if (uni(rng) < prep_error) alpha = &flipped;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double gain = p.v0 * std::sqrt(2.0 * p.kappa * p.eta);
    const double noise_scale = p.v0 / std::sqrt(dt);
    const Index n = alpha->size();
    ShotRecord rec;
    rec.v_i.resize(n);
    rec.v_q.resize(n);
    for (Index k = 0; k < n; ++k) rec.v_i(k) = gain * alpha->real()(k) + noise_scale * gauss(rng);
    for (Index k = 0; k < n; ++k) rec.v_q(k) = gain * alpha->imag()(k) + noise_scale * gauss(rng);
    out(i) = integrate_shot(rec, w, dt);
  }
  return out;
}

RamseyFringeData simulate_ramsey(const FieldTrajectory& traj, const ReadoutParams& p,
                                 int n_phases, int shots_per_point, std::uint64_t seed,
                                 const RamseyModel& model) {
  if (n_phases < 4) throw InvalidInput("Ramsey fringe needs at least 4 phase points");
  if (shots_per_point < 1) throw InvalidInput("shots_per_point must be positive");
  if (model.contrast < 0.0 || model.contrast > 1.0) {
    throw InvalidInput("Ramsey contrast must lie in [0, 1]");
  }
  const double gamma_m = dephasing_exponent(traj, p.chi);
  const double phi0 = model.phase_offset + deterministic_phase(traj, p.chi);
  const double fringe = model.contrast * std::exp(-gamma_m);

  RamseyFringeData data;
  data.phi = ArrayXd::LinSpaced(n_phases, 0.0, 2.0 * TWO_PI);
  data.sigma_z = ArrayXd(n_phases);
  data.shots_per_point = shots_per_point;
  for (int j = 0; j < n_phases; ++j) {
    const double mean_z = fringe * std::cos(data.phi(j) + phi0);
    const double p_up = std::clamp(0.5 * (1.0 + mean_z), 0.0, 1.0);
    std::mt19937_64 rng = stream_rng(seed, static_cast<std::uint64_t>(j));
    std::binomial_distribution<long> bin(shots_per_point, p_up);
    const long ups = bin(rng);
    data.sigma_z(j) = 2.0 * static_cast<double>(ups) / shots_per_point - 1.0;
  }
  return data;
}

}  // namespace qeff
