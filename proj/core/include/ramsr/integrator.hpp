#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ramsr/observables.hpp"
#include "ramsr/pulse_sequence.hpp"

namespace ramsr {

using cplx = std::complex<double>;
using StateVector = std::vector<cplx>;

enum class Method { adaptive_dp45, fixed_rk4 };

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 1e-7;      ///< s; also the step length of fixed_rk4
  double initial_step = 0.0;   ///< s; 0 selects a step from the local derivative
  Method method = Method::adaptive_dp45;

  void validate() const;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double smallest_step = 0.0;

  IntegratorStats& operator+=(const IntegratorStats& other);
};

using OdeRhs = std::function<void(double t, std::span<const cplx> y, std::span<cplx> dy)>;
using SampleFn = std::function<void(double t, std::span<const cplx> y)>;

/// Advances y from t0 to t1. sample_times must be sorted and lie in [t0, t1];
/// on_sample receives the (dense-output) state at each of them. Throws
/// NumericalError on step underflow or a non-finite state.
IntegratorStats solve_ode(const OdeRhs& rhs, StateVector& y, double t0, double t1,
                          std::span<const double> sample_times, const IntegratorConfig& cfg,
                          const SampleFn& on_sample);

struct Snapshot {
  double t = 0.0;
  std::size_t segment = 0;  ///< segment that ends at t
  StateVector state;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Observables> samples;
  std::vector<Snapshot> snapshots;  ///< state at the end of every segment
  IntegratorStats stats;

  const StateVector& final_state() const { return snapshots.back().state; }
  std::vector<double> channel(double Observables::*field) const;
};

using SegmentRhs =
    std::function<void(const Segment& seg, std::span<const cplx> y, std::span<cplx> dy)>;
using Observer = std::function<Observables(double t, std::span<const cplx> y)>;

/// Sample grid for a sequence: multiples of sample_dt plus every segment
/// boundary, strictly increasing.
std::vector<double> sample_grid(const PulseSequence& seq);

/// Integrates segment by segment (the step controller restarts at every pulse
/// edge) and records observables on sample_grid(seq).
Trajectory integrate(const SegmentRhs& rhs, const Observer& observe, StateVector state0,
                     const PulseSequence& seq, const IntegratorConfig& cfg);

/// Piecewise-cubic monotone (Fritsch-Carlson) interpolation of every
/// observable channel. Throws std::out_of_range outside the trajectory span.
std::vector<Observables> resample(const Trajectory& traj, std::span<const double> times);

/// Monotone piecewise-cubic interpolation of one series.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

}  // namespace ramsr
