#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ramsr/integrator.hpp"

namespace ramsr {

/// Scalar summary of the emission after the pump.
struct PulseMetrics {
  double peak_rate = 0.0;  ///< photons / s
  double peak_time = 0.0;  ///< s
  double delay = 0.0;      ///< peak_time - pump_end, s
  double area = 0.0;       ///< emitted photons in the readout window
  bool burst = false;      ///< peak_rate >= floor
};

/// Peak, delay and area of photon_rate over t >= pump_end. Throws
/// std::invalid_argument when the readout window holds fewer than two samples.
PulseMetrics pulse_metrics(const Trajectory& traj, double pump_end, double floor);

/// sin^2(angle/2): excited fraction after an ideal pulse of area `angle`.
double excitation_proxy(double pulse_area);

enum class ThresholdMetric { area, peak_rate };

struct ThresholdPoint {
  double proxy = 0.0;  ///< sin^2(Omega t_P / 2)
  PulseMetrics metrics;
};

struct ThresholdFit {
  double proxy = 0.0;          ///< knee location in the sin^2 coordinate
  double angle_over_pi = 0.0;  ///< the same knee as Omega t_P / pi
  double slope = 0.0;          ///< of the normalized metric above the knee
  double rms_residual = 0.0;
};

/// Least-squares fit of y = slope * max(0, x - knee) to the chosen metric
/// (normalized to its maximum). Points need not be sorted. Throws
/// std::invalid_argument for fewer than 8 points or when every point (or no
/// point) is flagged as a burst.
ThresholdFit detect_threshold(std::span<const ThresholdPoint> scan,
                              ThresholdMetric metric = ThresholdMetric::area);

struct LineshapePoint {
  double delta_hz = 0.0;
  PulseMetrics metrics;
};

struct FringeMetrics {
  double fringe_spacing = 0.0;  ///< Hz
  double envelope_width = 0.0;  ///< Hz, full width of the bursting envelope
  double zero_zone_fraction = 0.0;
  std::vector<double> kink_positions;  ///< Hz
  std::vector<double> maxima_hz;
  std::vector<double> maxima_height;
  bool envelope_resolved = true;  ///< false when bursts reach the edge of the grid
};

/// Fringe geometry of a lineshape sorted by detuning. Non-burst points count as
/// zero emission. Throws std::invalid_argument when the grid is coarser than
/// 1/(10 T) or spans fewer than three fringes.
FringeMetrics fringe_metrics(std::span<const LineshapePoint> lineshape, double free_time,
                             double tau_p);

/// Excited population of a single undamped atom after pi/2 - T - pi/2 with
/// square pulses of length tau_p at Rabi frequency rabi and detuning delta
/// (rad/s).
double traditional_ramsey_excitation(double rabi, double tau_p, double free_time, double delta);

struct FrequencyLocator {
  double value = 0.0;  ///< mean over the used pairs
  std::vector<double> per_pair;  ///< NaN for excluded pairs
  std::size_t pairs_used = 0;
  std::size_t pairs_excluded = 0;
};

/// FL = mean over consecutive pairs (P1,P2), (P3,P4), ... of
/// (P_{i+1} - P_i) / (P_{i+1} + P_i). Pairs where both peaks are <= floor are
/// excluded. Throws std::invalid_argument with fewer than 2 peaks or when every
/// pair is excluded.
FrequencyLocator frequency_locator(std::span<const double> peaks, double floor = 0.0);

/// FL as a function of the center detuning for symmetric stepping by +-step/2.
struct FlCalibration {
  double step_hz = 0.0;
  double frr_hz = 0.0;
  std::vector<double> detuning_hz;
  std::vector<double> fl;  ///< NaN where both stepped peaks are below the floor
  std::vector<double> fl_traditional;
  double slope_at_zero = 0.0;              ///< dFL/d(delta), 1/Hz
  double traditional_slope_at_zero = 0.0;  ///< 1/Hz
  std::size_t branch_begin = 0;  ///< monotone branch through the origin: [begin, end)
  std::size_t branch_end = 0;

  /// Center detuning (Hz) implied by an FL value, by inverse linear
  /// interpolation on the monotone branch (clamped to its ends).
  double detuning_for(double fl_value) const;
};

struct CalibrationOptions {
  double step_hz = 0.0;
  double frr_hz = 0.0;          ///< free Ramsey range, 1/T
  double range_frr = 0.4;       ///< centers span +-range_frr * frr
  std::size_t points = 161;
  double floor = 0.0;           ///< peaks below count as no emission
  double rabi = 0.0;            ///< rad/s, traditional reference
  double tau_p = 0.0;
  double free_time = 0.0;
};

/// Throws std::invalid_argument if the lineshape is coarser than step/5 or the
/// stepped detunings leave its support.
FlCalibration fl_calibration(std::span<const LineshapePoint> lineshape,
                             const CalibrationOptions& opts);

/// Peak rate interpolated on a lineshape (no-burst points as zero).
class LineshapeInterpolator {
 public:
  explicit LineshapeInterpolator(std::span<const LineshapePoint> lineshape);
  double operator()(double delta_hz) const;
  double min_hz() const { return interp_.front(); }
  double max_hz() const { return interp_.back(); }

 private:
  Pchip interp_;
};

/// Ordinary least squares y = a + b x, with R^2.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace ramsr
