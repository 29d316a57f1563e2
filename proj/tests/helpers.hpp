#pragma once

#include "qeff/types.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

namespace testutil {

using namespace qeff;

// Parameters in the regime the fixtures are designed around:
// kappa/2pi = 1.4 MHz, 2chi/2pi = -105 kHz.
inline ReadoutParams default_params(double delta = 0.0, double eta = 0.165) {
  ReadoutParams p;
  p.kappa = TWO_PI * 1.4e6;
  p.chi = -TWO_PI * 52.5e3;
  p.delta = delta;
  p.eta = eta;
  p.v0 = 1.0;
  return p;
}

// Drive amplitude of order "ramp-up to a few photons": Gamma_m ~ 0.6 at the
// default timing.
inline constexpr double EPS0 = 1.25e7;  // rad/s

// Measurement ramp (600 ns) followed by two depletion segments (200+200 ns)
// and a trailing buffer. Depletion amplitudes start at the ramp value; the
// solver or optimizer overrides them.
inline PulseEnvelope ramp_envelope(double eps = EPS0, double dt = 1e-9, double buffer = 100e-9) {
  PulseEnvelope env;
  env.sample_period = dt;
  env.buffer = buffer;
  env.segments.push_back({600e-9, eps, 0.0, {}, false});
  env.segments.push_back({200e-9, eps, 0.0, {}, true});
  env.segments.push_back({200e-9, eps, 0.0, {}, true});
  return env;
}

// Piecewise-constant stepped-gable profile over steps+1 samples, peak 1.
inline ArrayXcd canal_house(Index steps, std::initializer_list<double> levels) {
  const std::vector<double> lv(levels);
  ArrayXcd s(steps + 1);
  for (Index k = 0; k <= steps; ++k) {
    const auto idx = std::min(lv.size() - 1,
                              static_cast<std::size_t>((k * static_cast<Index>(lv.size())) /
                                                       (steps + 1)));
    s(k) = Complex(lv[idx], 0.0);
  }
  return s;
}

// Five sampled segments shaped like a row of canal houses: three make up the
// 600 ns measurement ramp, two are the depletion steps (240 + 160 ns).
inline PulseEnvelope skyline_envelope(double eps = EPS0, double dt = 1e-9,
                                      double buffer = 100e-9) {
  PulseEnvelope env;
  env.sample_period = dt;
  env.buffer = buffer;
  const auto steps = [&](double dur) { return static_cast<Index>(std::llround(dur / dt)); };
  env.segments.push_back(
      {200e-9, 0.80 * eps, 0.0, canal_house(steps(200e-9), {0.35, 0.65, 1.0, 0.65, 0.35}), false});
  env.segments.push_back(
      {200e-9, eps, 0.0, canal_house(steps(200e-9), {0.5, 0.75, 1.0, 1.0, 0.6}), false});
  env.segments.push_back(
      {200e-9, 0.90 * eps, 0.0, canal_house(steps(200e-9), {0.4, 1.0, 0.7, 0.45}), false});
  env.segments.push_back(
      {240e-9, eps, 0.0, canal_house(steps(240e-9), {0.45, 0.8, 1.0, 0.8, 0.45}), true});
  env.segments.push_back(
      {160e-9, eps, 0.0, canal_house(steps(160e-9), {0.6, 1.0, 1.0, 0.5}), true});
  return env;
}

}  // namespace testutil
