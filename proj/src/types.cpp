#include "qeff/types.hpp"

#include <cmath>
#include <cstdio>

namespace qeff {

namespace {

Index checked_steps(double duration, double dt, const char* what) {
  if (!(dt > 0.0)) throw InvalidInput("sample_period must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw InvalidInput(std::string(what) + " duration must be finite and non-negative");
  }
  const double ratio = duration / dt;
  const auto steps = static_cast<Index>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "%s duration %.6g s is not an integer multiple of the %.6g s grid step",
                  what, duration, dt);
    throw InvalidInput(msg);
  }
  return steps;
}

}  // namespace

void ReadoutParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidInput("kappa must be positive");
  if (!std::isfinite(chi)) throw InvalidInput("chi must be finite");
  if (!std::isfinite(delta)) throw InvalidInput("delta must be finite");
  if (!(eta > 0.0) || eta > 1.0) throw InvalidInput("eta must lie in (0, 1]");
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw InvalidInput("v0 must be positive");
}

Index PulseEnvelope::steps_of(const PulseSegment& seg) const {
  return checked_steps(seg.duration, sample_period, "segment");
}

Index PulseEnvelope::buffer_steps() const {
  return checked_steps(buffer, sample_period, "buffer");
}

Index PulseEnvelope::total_steps() const {
  Index n = buffer_steps();
  for (const auto& seg : segments) n += steps_of(seg);
  return n;
}

double PulseEnvelope::total_duration() const {
  return static_cast<double>(total_steps()) * sample_period;
}

ArrayXd PulseEnvelope::sample_times() const {
  return ArrayXd::LinSpaced(sample_count(), 0.0, total_duration());
}

std::vector<std::size_t> PulseEnvelope::depletion_segments() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].depletion) out.push_back(i);
  }
  return out;
}

Index PulseEnvelope::segment_start_step(std::size_t seg_index) const {
  if (seg_index > segments.size()) throw InvalidInput("segment index out of range");
  Index n = 0;
  for (std::size_t i = 0; i < seg_index; ++i) n += steps_of(segments[i]);
  return n;
}

PulseEnvelope PulseEnvelope::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw InvalidInput("envelope scale factor must be finite and non-negative");
  }
  PulseEnvelope out = *this;
  for (auto& seg : out.segments) seg.amplitude *= factor;
  return out;
}

void PulseEnvelope::validate() const {
  if (segments.empty()) throw InvalidInput("envelope has no segments");
  Index n = buffer_steps();
  for (const auto& seg : segments) {
    const Index steps = steps_of(seg);
    if (steps < 1) throw InvalidInput("segment duration must span at least one grid step");
    if (!(seg.amplitude >= 0.0) || !std::isfinite(seg.amplitude)) {
      throw InvalidInput("segment amplitude must be finite and non-negative");
    }
    if (!std::isfinite(seg.phase)) throw InvalidInput("segment phase must be finite");
    if (seg.sampled()) {
      if (seg.samples.size() != steps + 1) {
        throw InvalidInput("sampled segment needs steps+1 samples including both endpoints");
      }
      if (!seg.samples.isFinite().all()) throw InvalidInput("segment samples must be finite");
    }
    n += steps;
  }
  if (n < 1) throw InvalidInput("envelope spans no grid steps");
}

double FieldTrajectory::sample_period() const {
  if (times.size() < 2) throw InvalidInput("trajectory needs at least two samples");
  return times(1) - times(0);
}

double wrap_angle(double phi) {
  double w = std::remainder(phi, TWO_PI);
  if (w <= -TWO_PI / 2.0) w += TWO_PI;
  return w;
}

}  // namespace qeff
