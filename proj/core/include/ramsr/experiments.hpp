#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ramsr/analysis.hpp"
#include "ramsr/cluster_grid.hpp"
#include "ramsr/integrator.hpp"
#include "ramsr/params.hpp"
#include "ramsr/pulse_sequence.hpp"

namespace ramsr {

enum class Protocol { trace, threshold_scan, lineshape, lock, recycle, oracle_check };
enum class TraceSequence { pulse, ramsey };
enum class LossMode { pulsed_ramsey, no_pulses, mot_continuous };
enum class PeakSource { table, simulate };

const char* to_string(Protocol p);
const char* to_string(TraceSequence s);
const char* to_string(LossMode m);
const char* to_string(PeakSource s);
const char* to_string(ThresholdMetric m);
const char* to_string(Method m);

/// Atom loss between sequences. A set survival probability takes precedence
/// over the time constant.
struct LossModel {
  LossMode mode = LossMode::pulsed_ramsey;
  double tau_loss = 0.313;             ///< s
  std::optional<double> survival;      ///< per-sequence probability p
  double cycle_time = 2e-3;            ///< s

  /// Decay constant measured for each mode (s).
  static double default_tau(LossMode mode);
  double survival_per_sequence() const;
  void validate() const;
};

struct ExperimentConfig {
  Protocol protocol = Protocol::trace;
  PhysicalParams params = PhysicalParams::strontium_defaults();
  int n_phase = 16;
  int n_doppler = 3;
  IntegratorConfig integrator;

  double sample_dt = 2e-9;      ///< s
  double readout = 10e-6;       ///< s, drive-free window after the last pulse
  double floor_fraction = 0.01; ///< no-burst floor relative to the pi-pulse peak

  // trace
  TraceSequence trace_sequence = TraceSequence::pulse;
  double pulse_area = 1.0;  ///< Omega t_P / pi for single-pulse traces

  // threshold scan, in units of pi / Omega
  double scan_min = 0.1;
  double scan_max = 1.1;
  int scan_points = 21;
  ThresholdMetric threshold_metric = ThresholdMetric::area;

  // Ramsey sequence
  double tau_p = 300e-9;     ///< s
  double free_time = 5e-6;   ///< s

  // lineshape grid: coarse over +-span, fine over +-fine_span (Hz)
  double lineshape_span = 2.2e6;
  double lineshape_step = 10e3;
  double lineshape_fine_span = 0.3e6;
  double lineshape_fine_step = 2.5e3;

  // lock loop
  double lock_step_frr = 0.1;
  double lock_gain = 0.5;
  int lock_iterations = 108;
  int lock_cycles = 1;
  double lock_initial_offset = 0.0;   ///< Hz, laser error at the start
  double laser_noise = 0.0;           ///< Hz, random-walk std per sequence
  double drift_per_sequence = 0.0;    ///< Hz
  double lock_table_resolution = 2e3; ///< Hz
  PeakSource lock_peak_source = PeakSource::table;
  bool lock_apply_loss = false;

  // recycling
  LossModel loss;
  int recycle_sequences = 100;
  double min_atoms = 1e3;
  PeakSource recycle_peak_source = PeakSource::table;

  std::uint64_t rng_seed = 1;
  int threads = 0;  ///< 0 selects the hardware concurrency

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  double frr_hz() const { return 1.0 / free_time; }
  double lock_step_hz() const { return lock_step_frr * frr_hz(); }
};

/// Single simulation of one sequence with the configured grid and integrator.
class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, const PhysicalParams& params);
  explicit Simulator(const ExperimentConfig& cfg) : Simulator(cfg, cfg.params) {}

  const ClusterGrid& grid() const { return grid_; }
  Trajectory run(const PulseSequence& seq) const;

 private:
  ExperimentConfig cfg_;
  PhysicalParams params_;
  ClusterGrid grid_;
};

PulseSequence pi_pulse_sequence(const ExperimentConfig& cfg, double delta_a = 0.0);
PulseSequence ramsey_sequence(const ExperimentConfig& cfg, double delta_a);

struct TraceResult {
  PulseSequence sequence;
  Trajectory trajectory;
  PulseMetrics metrics;
  double pump_end = 0.0;
  std::vector<std::string> warnings;
};

TraceResult run_trace(const ExperimentConfig& cfg);

struct ThresholdRow {
  double t_p = 0.0;  ///< s
  double proxy = 0.0;
  PulseMetrics metrics;
  double normalized_peak = 0.0;
  double normalized_area = 0.0;
};

struct ThresholdScanResult {
  std::vector<ThresholdRow> rows;
  PulseMetrics reference;  ///< pi pulse
  double floor = 0.0;
  std::optional<ThresholdFit> fit;
  std::string fit_error;
  IntegratorStats stats;
};

/// t_P values spanning [scan_min, scan_max] pi / Omega.
std::vector<double> threshold_grid(const ExperimentConfig& cfg);
ThresholdScanResult threshold_scan(const ExperimentConfig& cfg, const std::vector<double>& t_p);

struct LineshapeRow {
  double delta_hz = 0.0;
  PulseMetrics metrics;
  double traditional = 0.0;  ///< single-atom Ramsey excitation at this detuning
};

struct LineshapeResult {
  std::vector<LineshapeRow> rows;
  double floor = 0.0;
  PulseMetrics reference;
  std::optional<FringeMetrics> fringes;
  std::string fringe_error;
  IntegratorStats stats;

  std::vector<LineshapePoint> points() const;
};

/// Union of the coarse and fine detuning grids (Hz), sorted.
std::vector<double> lineshape_grid(const ExperimentConfig& cfg);
LineshapeResult lineshape_scan(const ExperimentConfig& cfg, const std::vector<double>& delta_hz);

/// Peak rate versus atom number, captured once from resonant Ramsey runs and
/// interpolated in log-log space.
class PeakScaling {
 public:
  PeakScaling(std::vector<double> atoms, std::vector<double> peaks);
  static PeakScaling capture(const ExperimentConfig& cfg, double n_min, double n_max,
                             int points = 9);
  double operator()(double n_atoms) const;
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& peaks() const { return peaks_; }

 private:
  std::vector<double> atoms_;
  std::vector<double> peaks_;
  std::optional<Pchip> log_interp_;
};

struct LockIteration {
  int index = 0;
  int cycle = 0;
  double commanded_hz = 0.0;  ///< servo center +- step/2
  double actual_hz = 0.0;     ///< detuning seen by the atoms
  double peak_rate = 0.0;
  double atoms = 0.0;
};

struct LockPair {
  int index = 0;
  int cycle = 0;
  double fl = 0.0;           ///< NaN when excluded
  double estimate_hz = 0.0;  ///< center detuning implied by fl
  double correction_hz = 0.0;
  double residual_hz = 0.0;  ///< laser detuning at the pair center after correction
};

struct LockRecord {
  std::vector<LockIteration> iterations;
  std::vector<LockPair> pairs;
  std::vector<double> cycle_fl_mean;
  double residual_mean_hz = 0.0;
  double residual_std_hz = 0.0;
  double mean_correction_hz = 0.0;
  double fl_mean = 0.0;
  std::size_t excluded_pairs = 0;
  std::string termination = "completed";
  FlCalibration calibration;
  double floor = 0.0;
};

LockRecord lock_loop(const ExperimentConfig& cfg);

struct RecycleRow {
  int sequence = 0;
  double time = 0.0;  ///< s, start of the sequence
  double atoms = 0.0;
  double peak_rate = 0.0;
};

struct RecycleResult {
  std::vector<RecycleRow> rows;
  double fitted_tau = 0.0;  ///< s, from a log-linear fit of the atom numbers
  double survival = 0.0;
  std::optional<PeakScaling> scaling;
};

/// Throws NumericalError when the atom number drops below cfg.min_atoms.
RecycleResult recycle_run(const ExperimentConfig& cfg, int n_sequences);

/// Exponential decay constant from N(t) = N0 exp(-t/tau), by log-linear least squares.
double fit_decay_constant(const std::vector<double>& t, const std::vector<double>& n);

/// Worker count for scans (cfg.threads, or the hardware concurrency when 0).
unsigned scan_threads(const ExperimentConfig& cfg);

}  // namespace ramsr
