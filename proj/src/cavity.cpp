#include "qeff/cavity.hpp"

#include <algorithm>
#include <cmath>

namespace qeff {

namespace {
constexpr Complex I_UNIT(0.0, 1.0);
constexpr double GOLDEN = 0.61803398874989484820;
}  // namespace

Complex field_decay_rate(const ReadoutParams& p, QubitState s) {
  const double pull = (s == QubitState::ground) ? p.chi : -p.chi;
  return Complex(p.kappa / 2.0, p.delta + pull);
}

ArrayXcd evolve_field(const ReadoutParams& p, const PulseEnvelope& env, QubitState s) {
  p.validate();
  env.validate();
  const double dt = env.sample_period;
  const Complex lambda = field_decay_rate(p, s);
  const Complex free_decay = std::exp(-lambda * dt);

  ArrayXcd alpha(env.sample_count());
  Complex a(0.0, 0.0);
  Index k = 0;
  alpha(k) = a;

  for (const auto& seg : env.segments) {
    const Index steps = env.steps_of(seg);
    if (!seg.sampled()) {
      // Constant drive: exact transient toward the segment's steady state.
      const Complex a_ss = -I_UNIT * seg.drive() / lambda;
      for (Index i = 0; i < steps; ++i) {
        a = a_ss + (a - a_ss) * free_decay;
        alpha(++k) = a;
      }
    } else {
      // Drive known at the grid points; classic RK4 with the midpoint drive
      // taken as the average of the adjacent samples.
      const Complex scale = -I_UNIT * seg.drive();
      for (Index i = 0; i < steps; ++i) {
        const Complex d0 = scale * seg.samples(i);
        const Complex d1 = scale * seg.samples(i + 1);
        const Complex dm = 0.5 * (d0 + d1);
        const Complex k1 = d0 - lambda * a;
        const Complex k2 = dm - lambda * (a + 0.5 * dt * k1);
        const Complex k3 = dm - lambda * (a + 0.5 * dt * k2);
        const Complex k4 = d1 - lambda * (a + dt * k3);
        a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        alpha(++k) = a;
      }
    }
  }

  for (Index i = 0, n = env.buffer_steps(); i < n; ++i) {
    a *= free_decay;
    alpha(++k) = a;
  }
  return alpha;
}

FieldTrajectory simulate_trajectory(const ReadoutParams& p, const PulseEnvelope& env) {
  FieldTrajectory traj;
  traj.times = env.sample_times();
  traj.alpha0 = evolve_field(p, env, QubitState::ground);
  traj.alpha1 = evolve_field(p, env, QubitState::excited);
  return traj;
}

double dephasing_exponent(const FieldTrajectory& traj, double chi) {
  const double dt = traj.sample_period();
  const ArrayXd integrand = (traj.alpha1 * traj.alpha0.conjugate()).imag();
  return 2.0 * chi * trapezoid(integrand, dt);
}

double deterministic_phase(const FieldTrajectory& traj, double chi) {
  const double dt = traj.sample_period();
  const ArrayXd integrand = (traj.alpha1 * traj.alpha0.conjugate()).real();
  return 2.0 * chi * trapezoid(integrand, dt);
}

WeightFunctions optimal_weights(const FieldTrajectory& traj, double min_separation) {
  const ArrayXcd diff = traj.alpha1 - traj.alpha0;
  const double peak = diff.abs().maxCoeff();
  const double field_scale =
      std::max(traj.alpha0.abs().maxCoeff(), traj.alpha1.abs().maxCoeff());
  if (field_scale <= 0.0 || peak <= min_separation * field_scale) {
    throw DegenerateWeights("pointer states are indistinguishable: |alpha1 - alpha0| vanishes");
  }
  WeightFunctions w;
  w.w_i = diff.real() / peak;
  w.w_q = diff.imag() / peak;
  w.kind = WeightKind::optimal;
  return w;
}

WeightFunctions square_weights(double phi_w, Index n_samples) {
  if (n_samples < 2) throw InvalidInput("square weights need at least two samples");
  WeightFunctions w;
  w.w_i = ArrayXd::Constant(n_samples, std::cos(phi_w));
  w.w_q = ArrayXd::Constant(n_samples, std::sin(phi_w));
  w.kind = WeightKind::square;
  w.phi_w = phi_w;
  return w;
}

double optimize_square_phase(const FieldTrajectory& traj, const ReadoutParams& p, int n_scan) {
  (void)p;
  if (n_scan < 4) throw InvalidInput("square-phase scan needs at least 4 points");
  const double dt = traj.sample_period();
  const ArrayXcd diff = traj.alpha1 - traj.alpha0;
  // For constant weights the SNR reduces to |X cos(phi) + Y sin(phi)| up to
  // weight-independent factors; it is pi-periodic in phi.
  const double x = trapezoid(ArrayXd(diff.real()), dt);
  const double y = trapezoid(ArrayXd(diff.imag()), dt);
  const auto snr_of = [&](double phi) { return std::abs(x * std::cos(phi) + y * std::sin(phi)); };

  const double pi = TWO_PI / 2.0;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < n_scan; ++i) {
    const double v = snr_of(pi * i / n_scan);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = pi * (best - 1) / n_scan;
  double hi = pi * (best + 1) / n_scan;
  double m1 = hi - GOLDEN * (hi - lo);
  double m2 = lo + GOLDEN * (hi - lo);
  double f1 = snr_of(m1);
  double f2 = snr_of(m2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + GOLDEN * (hi - lo);
      f2 = snr_of(m2);
    } else {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - GOLDEN * (hi - lo);
      f1 = snr_of(m1);
    }
  }
  double phi = 0.5 * (lo + hi);
  phi = std::fmod(phi, pi);
  if (phi < 0.0) phi += pi;
  return phi;
}

double analytic_signal(const FieldTrajectory& traj, const ReadoutParams& p,
                       const WeightFunctions& w) {
  if (w.w_i.size() != traj.size() || w.w_q.size() != traj.size()) {
    throw InvalidInput("weight functions and trajectory live on different grids");
  }
  const double dt = traj.sample_period();
  const ArrayXcd diff = traj.alpha1 - traj.alpha0;
  const ArrayXd integrand = w.w_i * diff.real() + w.w_q * diff.imag();
  return p.v0 * std::sqrt(2.0 * p.kappa * p.eta) * std::abs(trapezoid(integrand, dt));
}

double analytic_noise(const ReadoutParams& p, const WeightFunctions& w, double dt) {
  const ArrayXd integrand = w.w_i.square() + w.w_q.square();
  return p.v0 * std::sqrt(trapezoid(integrand, dt));
}

double analytic_snr(const FieldTrajectory& traj, const ReadoutParams& p,
                    const WeightFunctions& w) {
  const double noise = analytic_noise(p, w, traj.sample_period());
  if (noise <= 0.0) throw DegenerateWeights("weight functions are identically zero");
  return analytic_signal(traj, p, w) / noise;
}

double analytic_snr_optimal(const FieldTrajectory& traj, const ReadoutParams& p) {
  const double dt = traj.sample_period();
  const ArrayXd sep2 = (traj.alpha1 - traj.alpha0).abs2();
  return std::sqrt(2.0 * p.kappa * p.eta * trapezoid(sep2, dt));
}

PulseEnvelope with_depletion_drives(PulseEnvelope env, std::pair<std::size_t, std::size_t> segs,
                                    Complex d0, Complex d1) {
  if (segs.first >= env.segments.size() || segs.second >= env.segments.size() ||
      segs.first == segs.second) {
    throw InvalidInput("depletion segment indices invalid");
  }
  env.segments[segs.first].amplitude = std::abs(d0);
  env.segments[segs.first].phase = std::arg(d0);
  env.segments[segs.second].amplitude = std::abs(d1);
  env.segments[segs.second].phase = std::arg(d1);
  return env;
}

std::pair<Complex, Complex> solve_depletion(const ReadoutParams& p, const PulseEnvelope& env,
                                            std::pair<std::size_t, std::size_t> segs) {
  p.validate();
  env.validate();
  if (segs.first >= env.segments.size() || segs.second >= env.segments.size() ||
      segs.first == segs.second) {
    throw InvalidInput("depletion segment indices invalid");
  }

  const PulseEnvelope base = with_depletion_drives(env, segs, Complex(0.0), Complex(0.0));
  PulseEnvelope probe = base;
  for (auto& seg : probe.segments) seg.amplitude = 0.0;

  const auto final_field = [&](const PulseEnvelope& e, QubitState s) {
    const ArrayXcd a = evolve_field(p, e, s);
    return a(a.size() - 1);
  };
  const auto unit_env = [&](std::size_t idx) {
    PulseEnvelope e = probe;
    e.segments[idx].amplitude = 1.0;
    e.segments[idx].phase = 0.0;
    return e;
  };

  const PulseEnvelope u0 = unit_env(segs.first);
  const PulseEnvelope u1 = unit_env(segs.second);

  Eigen::Matrix2cd response;
  Eigen::Vector2cd rhs;
  response(0, 0) = final_field(u0, QubitState::ground);
  response(0, 1) = final_field(u1, QubitState::ground);
  response(1, 0) = final_field(u0, QubitState::excited);
  response(1, 1) = final_field(u1, QubitState::excited);
  rhs(0) = -final_field(base, QubitState::ground);
  rhs(1) = -final_field(base, QubitState::excited);

  Eigen::FullPivLU<Eigen::Matrix2cd> lu(response);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw SingularSystem(
        "depletion responses cannot separate the qubit states (is chi nonzero?)");
  }
  const Eigen::Vector2cd drives = lu.solve(rhs);
  return {drives(0), drives(1)};
}

}  // namespace qeff
