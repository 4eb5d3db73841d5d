#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ramsr {

/// One piecewise-constant drive interval. rabi == 0 is free evolution.
struct Segment {
  double duration = 0.0;  ///< s
  double rabi = 0.0;      ///< rad/s
  double phase = 0.0;     ///< rad
  double delta_a = 0.0;   ///< laser detuning during this segment, rad/s
  std::string label;
};

struct DriveSample {
  std::complex<double> half_amplitude;  ///< (rabi/2) e^{i phase}
  double delta_a = 0.0;
  std::size_t segment = 0;
};

struct PulseSequence {
  std::vector<Segment> segments;
  double sample_dt = 1e-9;  ///< s

  void validate() const;
  double total_duration() const;
  /// Segment start times followed by the end time (size = segments + 1).
  std::vector<double> boundaries() const;
  /// Active segment at t. Segments are closed on the left; the final segment
  /// also owns the end point.
  std::size_t segment_at(double t) const;
  /// End time of the last segment carrying drive (0 if none).
  double last_drive_end() const;

  /// Single square pump pulse of length t_pulse followed by a drive-free
  /// readout window.
  static PulseSequence single_pulse(double rabi, double t_pulse, double readout, double delta_a,
                                    double sample_dt);

  /// pi/2 pulse, free evolution T, pi/2 pulse, readout window. When tau_p is
  /// empty the pulse length is (pi/2)/rabi. second_phase rotates the drive
  /// phase of the closing pulse.
  static PulseSequence ramsey(double rabi, std::optional<double> tau_p, double free_time,
                              double readout, double delta_a, double sample_dt,
                              double second_phase = 0.0);
};

/// Complex drive half-amplitude and detuning of the segment active at t.
DriveSample drive_amplitude(const PulseSequence& seq, double t);

}  // namespace ramsr
