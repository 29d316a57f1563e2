#include "qeff/depletion.hpp"

#include <algorithm>
#include <cmath>

namespace qeff {

DepletionParams drives_to_params(Complex d0, Complex d1) {
  DepletionParams dp;
  dp.eps_d0 = std::abs(d0);
  dp.phi_d0 = wrap_angle(std::arg(d0));
  dp.eps_d1 = std::abs(d1);
  dp.phi_d1 = wrap_angle(std::arg(d1));
  return dp;
}

std::pair<Complex, Complex> params_to_drives(const DepletionParams& dp) {
  // Amplitudes may be negative while the optimizer explores; fold the sign
  // into the phase by plain multiplication instead of std::polar.
  const Complex d0 = dp.eps_d0 * Complex(std::cos(dp.phi_d0), std::sin(dp.phi_d0));
  const Complex d1 = dp.eps_d1 * Complex(std::cos(dp.phi_d1), std::sin(dp.phi_d1));
  return {d0, d1};
}

namespace {

struct CostWindow {
  Index start = 0;
  Index count = 0;  // samples in the window
};

CostWindow cost_window(const PulseEnvelope& env, std::pair<std::size_t, std::size_t> segs,
                       const DepletionCostConfig& cfg) {
  if (segs.first >= env.segments.size() || segs.second >= env.segments.size() ||
      segs.first == segs.second) {
    throw InvalidInput("depletion segment indices invalid");
  }
  const std::size_t last = std::max(segs.first, segs.second);
  const Index start = env.segment_start_step(last) + env.steps_of(env.segments[last]);
  const auto steps = static_cast<Index>(std::llround(cfg.window / env.sample_period));
  if (steps < 2) throw InvalidInput("depletion cost window spans fewer than two grid steps");
  if (start + steps > env.total_steps()) {
    throw InvalidInput("depletion cost window extends past the end of the envelope");
  }
  return {start, steps + 1};
}

double window_cost(const ShotRecord& r0, const ShotRecord& r1, const CostWindow& win,
                   const DepletionCostConfig& cfg, double dt) {
  const ArrayXd vi0 = r0.v_i.segment(win.start, win.count);
  const ArrayXd vq0 = r0.v_q.segment(win.start, win.count);
  const ArrayXd vi1 = r1.v_i.segment(win.start, win.count);
  const ArrayXd vq1 = r1.v_q.segment(win.start, win.count);
  const double d = cfg.difference_weight;
  double c = std::sqrt(trapezoid(ArrayXd(vi0.square() + vq0.square()), dt));
  c += std::sqrt(trapezoid(ArrayXd(vi1.square() + vq1.square()), dt));
  c += d * std::sqrt(trapezoid(ArrayXd((vi1 - vi0).square()), dt));
  c += d * std::sqrt(trapezoid(ArrayXd((vq1 - vq0).square()), dt));
  return c;
}

}  // namespace

double depletion_cost(const ReadoutParams& p, const PulseEnvelope& env,
                      std::pair<std::size_t, std::size_t> segs, const DepletionParams& dp,
                      const DepletionCostConfig& cfg, TuneupMode mode, std::uint64_t seed) {
  const CostWindow win = cost_window(env, segs, cfg);
  const auto [d0, d1] = params_to_drives(dp);
  const PulseEnvelope driven = with_depletion_drives(env, segs, d0, d1);
  const double dt = env.sample_period;

  const ArrayXcd a0 = evolve_field(p, driven, QubitState::ground);
  const ArrayXcd a1 = evolve_field(p, driven, QubitState::excited);

  ShotRecord r0, r1;
  if (mode == TuneupMode::noiseless) {
    r0 = mean_record(a0, p);
    r1 = mean_record(a1, p);
  } else {
    r0 = average_record(a0, p, dt, cfg.shots, derive_seed(seed, {0x746e755fULL}));
    r1 = average_record(a1, p, dt, cfg.shots, derive_seed(seed, {0x746e755fULL, 1}));
  }
  return window_cost(r0, r1, win, cfg, dt);
}

DepletionParams default_depletion_guess(const PulseEnvelope& env) {
  double scale = 0.0;
  for (std::size_t i = 0; i < env.segments.size(); ++i) {
    if (env.segments[i].depletion) continue;
    double peak = env.segments[i].amplitude;
    if (env.segments[i].sampled()) peak *= env.segments[i].samples.abs().maxCoeff();
    scale = std::max(scale, peak);
  }
  if (scale <= 0.0) scale = 1.0;
  return {scale, scale, 0.0, 0.0};
}

DepletionResult optimize_depletion(const ReadoutParams& p, const PulseEnvelope& env,
                                   std::pair<std::size_t, std::size_t> segs,
                                   const DepletionParams& initial, const DepletionCostConfig& cfg,
                                   TuneupMode mode, const NelderMeadOptions& opts,
                                   std::uint64_t seed) {
  p.validate();
  env.validate();
  const CostWindow win = cost_window(env, segs, cfg);
  const double dt = env.sample_period;

  // Common random numbers: the per-shot noise does not depend on the drive
  // parameters, so the averaged noise transient is one fixed array per state.
  // Adding it to the noiseless mean equals averaging the noisy records.
  ShotRecord noise0, noise1;
  const bool mc = (mode == TuneupMode::monte_carlo);
  if (mc) {
    const ArrayXcd zero = ArrayXcd::Zero(env.sample_count());
    noise0 = average_record(zero, p, dt, cfg.shots, derive_seed(seed, {0x746e755fULL}));
    noise1 = average_record(zero, p, dt, cfg.shots, derive_seed(seed, {0x746e755fULL, 1}));
  }

  const auto cost_of = [&](const Eigen::VectorXd& x) {
    const auto [d0, d1] = params_to_drives({x(0), x(1), x(2), x(3)});
    const PulseEnvelope driven = with_depletion_drives(env, segs, d0, d1);
    ShotRecord r0 = mean_record(evolve_field(p, driven, QubitState::ground), p);
    ShotRecord r1 = mean_record(evolve_field(p, driven, QubitState::excited), p);
    if (mc) {
      r0.v_i += noise0.v_i;
      r0.v_q += noise0.v_q;
      r1.v_i += noise1.v_i;
      r1.v_q += noise1.v_q;
    }
    return window_cost(r0, r1, win, cfg, dt);
  };

  const double amp_scale = std::max({std::abs(initial.eps_d0), std::abs(initial.eps_d1),
                                     default_depletion_guess(env).eps_d0});
  Eigen::VectorXd x0(4);
  x0 << initial.eps_d0, initial.eps_d1, initial.phi_d0, initial.phi_d1;
  Eigen::VectorXd steps(4);
  steps << 0.2 * amp_scale, 0.2 * amp_scale, 0.2, 0.2;

  NelderMeadOptions nm = opts;
  if (mode == TuneupMode::monte_carlo) {
    // Standard error of one cost evaluation under resampled noise. With
    // common random numbers, cost differences stay meaningful four orders
    // below it, and the bowl around the minimum is shallow, so stop well
    // under the floor itself.
    const double floor =
        (2.0 + 2.0 * std::sqrt(2.0) * cfg.difference_weight) * p.v0 / std::sqrt(double(cfg.shots));
    nm.spread_tol = std::max(opts.spread_tol, 1e-4 * floor);
  }

  const NelderMeadResult nr = nelder_mead(cost_of, x0, steps, nm);

  DepletionResult out;
  out.cost = nr.fx;
  out.evaluations = nr.evaluations;
  out.converged = nr.converged;
  // Canonical form: non-negative amplitudes, phases wrapped to (-pi, pi].
  const auto [d0, d1] = params_to_drives({nr.x(0), nr.x(1), nr.x(2), nr.x(3)});
  out.params = drives_to_params(d0, d1);
  out.trace.reserve(nr.history.size());
  for (std::size_t i = 0; i < nr.history.size(); ++i) {
    const auto& h = nr.history[i];
    out.trace.push_back(
        {static_cast<int>(i), DepletionParams{h.x(0), h.x(1), h.x(2), h.x(3)}, h.fx});
  }
  return out;
}

}  // namespace qeff
