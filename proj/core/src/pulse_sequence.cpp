#include "ramsr/pulse_sequence.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ramsr {

void PulseSequence::validate() const {
  if (segments.empty()) throw std::invalid_argument("PulseSequence: no segments");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw std::invalid_argument("PulseSequence: segment durations must be positive and finite");
    }
    if (!(s.rabi >= 0.0) || !std::isfinite(s.phase) || !std::isfinite(s.delta_a)) {
      throw std::invalid_argument("PulseSequence: invalid segment drive");
    }
  }
  if (!(sample_dt > 0.0)) throw std::invalid_argument("PulseSequence: sample_dt must be > 0");
}

double PulseSequence::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

std::vector<double> PulseSequence::boundaries() const {
  std::vector<double> b;
  b.reserve(segments.size() + 1);
  double t = 0.0;
  b.push_back(t);
  for (const auto& s : segments) {
    t += s.duration;
    b.push_back(t);
  }
  return b;
}

std::size_t PulseSequence::segment_at(double t) const {
  const auto b = boundaries();
  if (t < 0.0 || t > b.back()) {
    throw std::out_of_range("PulseSequence: time outside the sequence");
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (t < b[k + 1]) return k;
  }
  return segments.size() - 1;
}

double PulseSequence::last_drive_end() const {
  double t = 0.0;
  double end = 0.0;
  for (const auto& s : segments) {
    t += s.duration;
    if (s.rabi > 0.0) end = t;
  }
  return end;
}

PulseSequence PulseSequence::single_pulse(double rabi, double t_pulse, double readout,
                                          double delta_a, double sample_dt) {
  PulseSequence seq;
  seq.sample_dt = sample_dt;
  seq.segments.push_back(Segment{t_pulse, rabi, 0.0, delta_a, "pump"});
  seq.segments.push_back(Segment{readout, 0.0, 0.0, delta_a, "readout"});
  seq.validate();
  return seq;
}

PulseSequence PulseSequence::ramsey(double rabi, std::optional<double> tau_p, double free_time,
                                    double readout, double delta_a, double sample_dt,
                                    double second_phase) {
  if (!(rabi > 0.0)) throw std::invalid_argument("PulseSequence::ramsey: rabi must be > 0");
  const double tau = tau_p.value_or(0.5 * std::numbers::pi / rabi);
  PulseSequence seq;
  seq.sample_dt = sample_dt;
  seq.segments.push_back(Segment{tau, rabi, 0.0, delta_a, "pulse1"});
  seq.segments.push_back(Segment{free_time, 0.0, 0.0, delta_a, "free"});
  seq.segments.push_back(Segment{tau, rabi, second_phase, delta_a, "pulse2"});
  seq.segments.push_back(Segment{readout, 0.0, 0.0, delta_a, "readout"});
  seq.validate();
  return seq;
}

DriveSample drive_amplitude(const PulseSequence& seq, double t) {
  const std::size_t k = seq.segment_at(t);
  const Segment& s = seq.segments[k];
  return DriveSample{std::polar(0.5 * s.rabi, s.phase), s.delta_a, k};
}

}  // namespace ramsr
