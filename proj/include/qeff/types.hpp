#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qeff {

using Complex = std::complex<double>;
using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::Index;

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

// Bad caller input: out-of-range parameter, malformed envelope, too few samples.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The two pointer states coincide, so no weight function can separate them.
struct DegenerateWeights : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear solve has no unique solution (e.g. depletion response matrix).
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative fit did not reach its convergence criterion.
struct FitFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class QubitState { ground, excited };

// Dispersive readout of one resonator coupled to one qubit. The resonator
// frequency is pulled by +chi for |0> and -chi for |1>; delta is the drive
// detuning measured from the midpoint of the two pulled frequencies. All
// rates are angular (rad/s), all times are seconds.
struct ReadoutParams {
  double kappa = 0.0;  // resonator linewidth
  double chi = 0.0;    // half the dispersive shift between the two states
  double delta = 0.0;  // drive detuning from the midpoint frequency
  double eta = 1.0;    // detection quantum efficiency, in (0, 1]
  double v0 = 1.0;     // overall voltage scale of the acquisition chain

  void validate() const;
};

// One piece of a drive envelope. A segment is either constant (amplitude and
// phase held for the whole duration) or sampled: `samples` then holds the
// complex unit shape on the segment's own grid, steps+1 points including both
// endpoints, and is multiplied by amplitude*exp(i*phase).
struct PulseSegment {
  double duration = 0.0;   // seconds, an integer multiple of the grid step
  double amplitude = 0.0;  // drive strength (rad/s), >= 0
  double phase = 0.0;      // rad
  ArrayXcd samples;        // empty for a constant segment
  bool depletion = false;  // marks a tunable photon-depletion step

  bool sampled() const { return samples.size() > 0; }
  Complex drive() const { return std::polar(amplitude, phase); }
};

// A full drive envelope: segments played back to back, then `buffer` seconds
// of zero drive. Everything is resolved on a uniform grid of sample_period.
struct PulseEnvelope {
  std::vector<PulseSegment> segments;
  double sample_period = 1e-9;  // seconds
  double buffer = 0.0;          // trailing zero-drive window, seconds

  Index steps_of(const PulseSegment& seg) const;
  Index buffer_steps() const;
  Index total_steps() const;                 // grid intervals over the full window
  Index sample_count() const { return total_steps() + 1; }
  double total_duration() const;             // includes the buffer
  ArrayXd sample_times() const;
  std::vector<std::size_t> depletion_segments() const;
  Index segment_start_step(std::size_t seg_index) const;

  // Same envelope with every amplitude multiplied by `factor`.
  PulseEnvelope scaled(double factor) const;

  void validate() const;
};

// Cavity field for both qubit states on the shared envelope grid.
struct FieldTrajectory {
  ArrayXd times;
  ArrayXcd alpha0;  // qubit in |0>
  ArrayXcd alpha1;  // qubit in |1>

  Index size() const { return times.size(); }
  double sample_period() const;
};

enum class WeightKind { optimal, square };

// Integration weights on the trajectory grid, peak-normalized so that
// max_k sqrt(w_i^2 + w_q^2) = 1.
struct WeightFunctions {
  ArrayXd w_i;
  ArrayXd w_q;
  WeightKind kind = WeightKind::optimal;
  double phi_w = 0.0;  // demodulation phase; only meaningful for square kind
};

// Trapezoidal integral of uniformly sampled y with spacing dt.
inline double trapezoid(const ArrayXd& y, double dt) {
  if (y.size() < 2) return 0.0;
  return dt * (y.sum() - 0.5 * (y(0) + y(y.size() - 1)));
}

inline Complex trapezoid(const ArrayXcd& y, double dt) {
  if (y.size() < 2) return Complex(0.0, 0.0);
  return dt * (y.sum() - 0.5 * (y(0) + y(y.size() - 1)));
}

// Wrap an angle to (-pi, pi].
double wrap_angle(double phi);

}  // namespace qeff
