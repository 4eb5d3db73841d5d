#include "ramsr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "ramsr/cumulant_model.hpp"
#include "ramsr/error.hpp"

namespace ramsr {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ExperimentConfig: " + what);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written by index, so the outcome does not depend on scheduling. The
// exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double pump_end_of(const PulseSequence& seq) { return seq.last_drive_end(); }

}  // namespace

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::trace: return "trace";
    case Protocol::threshold_scan: return "threshold-scan";
    case Protocol::lineshape: return "lineshape";
    case Protocol::lock: return "lock";
    case Protocol::recycle: return "recycle";
    case Protocol::oracle_check: return "oracle-check";
  }
  return "?";
}

const char* to_string(TraceSequence s) { return s == TraceSequence::pulse ? "pulse" : "ramsey"; }

const char* to_string(LossMode m) {
  switch (m) {
    case LossMode::pulsed_ramsey: return "pulsed-ramsey";
    case LossMode::no_pulses: return "no-pulses";
    case LossMode::mot_continuous: return "mot-continuous";
  }
  return "?";
}

const char* to_string(PeakSource s) { return s == PeakSource::table ? "table" : "simulate"; }
const char* to_string(ThresholdMetric m) { return m == ThresholdMetric::area ? "area" : "peak"; }
const char* to_string(Method m) { return m == Method::adaptive_dp45 ? "dp45" : "rk4"; }

double LossModel::default_tau(LossMode mode) {
  switch (mode) {
    case LossMode::pulsed_ramsey: return 0.313;
    case LossMode::no_pulses: return 0.431;
    case LossMode::mot_continuous: return 0.409;
  }
  return 0.313;
}

double LossModel::survival_per_sequence() const {
  if (survival) return *survival;
  return std::exp(-cycle_time / tau_loss);
}

void LossModel::validate() const {
  if (survival) require(*survival > 0.0 && *survival <= 1.0, "loss survival must be in (0, 1]");
  require(tau_loss > 0.0, "loss tau must be positive");
  require(cycle_time > 0.0, "loss cycle_time must be positive");
}

void ExperimentConfig::validate() const {
  params.validate();
  integrator.validate();
  loss.validate();
  require(n_phase >= 1 && n_doppler >= 1, "n_phase and n_doppler must be >= 1");
  require(sample_dt > 0.0, "sample_dt must be positive");
  require(params.kappa > 0.0 && readout >= 5.0 / params.kappa * (1.0 - 1e-12),
          "readout window must be at least 5/kappa");
  require(floor_fraction > 0.0 && floor_fraction < 1.0, "floor_fraction must be in (0, 1)");
  require(pulse_area >= 0.0, "pulse_area must be non-negative");
  require(scan_points >= 1 && scan_max > scan_min && scan_min > 0.0,
          "threshold scan grid must be non-empty with 0 < min < max");
  require(tau_p > 0.0 && free_time > 0.0, "tau_p and free_time must be positive");
  require(lineshape_span > 0.0 && lineshape_step > 0.0, "lineshape grid must be non-empty");
  require(lineshape_fine_span >= 0.0 && lineshape_fine_step > 0.0,
          "lineshape fine grid must be non-negative");
  require(lock_step_frr > 0.0, "lock step must be positive");
  require(lock_gain >= 0.0, "lock gain must be non-negative");
  require(lock_iterations >= 2, "lock needs at least two iterations");
  require(lock_cycles >= 1, "lock needs at least one cycle");
  require(laser_noise >= 0.0, "laser noise must be non-negative");
  require(lock_table_resolution > 0.0 && lock_table_resolution <= lock_step_hz() / 5.0,
          "lock table resolution must be positive and at most step/5");
  require(recycle_sequences >= 1, "recycle needs at least one sequence");
  require(min_atoms > 0.0, "min_atoms must be positive");
  require(threads >= 0, "threads must be >= 0");
}

unsigned scan_threads(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return static_cast<unsigned>(cfg.threads);
  return std::max(1u, std::thread::hardware_concurrency());
}

Simulator::Simulator(const ExperimentConfig& cfg, const PhysicalParams& params)
    : cfg_(cfg), params_(params), grid_(build_cluster_grid(params, cfg.n_phase, cfg.n_doppler)) {}

Trajectory Simulator::run(const PulseSequence& seq) const {
  const CumulantModel model(grid_, params_);
  return integrate(
      [&](const Segment& s, std::span<const cplx> y, std::span<cplx> dy) { model.rhs(s, y, dy); },
      [&](double, std::span<const cplx> y) { return model.observe(y); }, model.ground_state(),
      seq, cfg_.integrator);
}

PulseSequence pi_pulse_sequence(const ExperimentConfig& cfg, double delta_a) {
  const double rabi = cfg.params.rabi;
  return PulseSequence::single_pulse(rabi, std::numbers::pi / rabi, cfg.readout, delta_a,
                                     cfg.sample_dt);
}

PulseSequence ramsey_sequence(const ExperimentConfig& cfg, double delta_a) {
  return PulseSequence::ramsey(cfg.params.rabi, cfg.tau_p, cfg.free_time, cfg.readout, delta_a,
                               cfg.sample_dt);
}

TraceResult run_trace(const ExperimentConfig& cfg) {
  cfg.validate();
  const Simulator sim(cfg);
  TraceResult out;
  out.warnings = sim.grid().warnings;
  const double rabi = cfg.params.rabi;
  const double delta = cfg.params.delta_a;
  if (cfg.trace_sequence == TraceSequence::ramsey) {
    out.sequence = ramsey_sequence(cfg, delta);
  } else if (rabi > 0.0) {
    const double t_p = cfg.pulse_area * std::numbers::pi / rabi;
    out.sequence = PulseSequence::single_pulse(rabi, t_p, cfg.readout, delta, cfg.sample_dt);
  } else {
    // no drive: a bare readout window
    out.sequence.sample_dt = cfg.sample_dt;
    out.sequence.segments.push_back(Segment{cfg.readout, 0.0, 0.0, delta, "readout"});
  }
  out.trajectory = sim.run(out.sequence);
  out.pump_end = pump_end_of(out.sequence);
  // the floor needs the pi-pulse peak; without drive there is nothing to compare
  double floor = 0.0;
  if (rabi > 0.0) {
    const bool is_pi = cfg.trace_sequence == TraceSequence::pulse && cfg.pulse_area == 1.0 &&
                       cfg.params.delta_a == 0.0;
    PulseMetrics ref;
    if (is_pi) {
      ref = pulse_metrics(out.trajectory, out.pump_end, 0.0);
    } else {
      const PulseSequence pi = pi_pulse_sequence(cfg);
      ref = pulse_metrics(sim.run(pi), pump_end_of(pi), 0.0);
    }
    floor = cfg.floor_fraction * ref.peak_rate;
  }
  out.metrics = pulse_metrics(out.trajectory, out.pump_end, floor);
  if (rabi == 0.0) out.metrics.burst = false;
  return out;
}

std::vector<double> threshold_grid(const ExperimentConfig& cfg) {
  std::vector<double> t;
  const double unit = std::numbers::pi / cfg.params.rabi;
  if (cfg.scan_points == 1) return {cfg.scan_min * unit};
  for (int k = 0; k < cfg.scan_points; ++k) {
    const double a = cfg.scan_min + (cfg.scan_max - cfg.scan_min) * k / (cfg.scan_points - 1);
    t.push_back(a * unit);
  }
  return t;
}

ThresholdScanResult threshold_scan(const ExperimentConfig& cfg, const std::vector<double>& t_p) {
  cfg.validate();
  if (t_p.empty()) throw std::invalid_argument("threshold_scan: empty t_P grid");
  const double rabi = cfg.params.rabi;
  require(rabi > 0.0, "threshold scan needs a nonzero Rabi frequency");
  const Simulator sim(cfg);
  const double delta = cfg.params.delta_a;

  // index 0 is the pi-pulse reference
  const std::size_t n = t_p.size() + 1;
  std::vector<PulseMetrics> metrics(n);
  std::vector<IntegratorStats> stats(n);
  parallel_for(n, scan_threads(cfg), [&](std::size_t i) {
    const double t = i == 0 ? std::numbers::pi / rabi : t_p[i - 1];
    const PulseSequence seq =
        PulseSequence::single_pulse(rabi, t, cfg.readout, delta, cfg.sample_dt);
    const Trajectory traj = sim.run(seq);
    metrics[i] = pulse_metrics(traj, pump_end_of(seq), 0.0);
    stats[i] = traj.stats;
  });

  ThresholdScanResult out;
  out.reference = metrics[0];
  out.floor = cfg.floor_fraction * out.reference.peak_rate;
  for (const auto& s : stats) out.stats += s;
  std::vector<ThresholdPoint> pts;
  for (std::size_t i = 1; i < n; ++i) {
    ThresholdRow row;
    row.t_p = t_p[i - 1];
    row.proxy = excitation_proxy(rabi * row.t_p);
    row.metrics = metrics[i];
    row.metrics.burst = row.metrics.peak_rate >= out.floor;
    row.normalized_peak = row.metrics.peak_rate / out.reference.peak_rate;
    row.normalized_area = row.metrics.area / out.reference.area;
    out.rows.push_back(row);
    pts.push_back(ThresholdPoint{row.proxy, row.metrics});
  }
  try {
    out.fit = detect_threshold(pts, cfg.threshold_metric);
  } catch (const std::invalid_argument& e) {
    out.fit_error = e.what();
  }
  return out;
}

std::vector<LineshapePoint> LineshapeResult::points() const {
  std::vector<LineshapePoint> p;
  p.reserve(rows.size());
  for (const auto& r : rows) p.push_back(LineshapePoint{r.delta_hz, r.metrics});
  return p;
}

std::vector<double> lineshape_grid(const ExperimentConfig& cfg) {
  std::vector<double> d;
  auto add = [&](double span, double step) {
    const long k = static_cast<long>(std::floor(span / step + 1e-9));
    for (long i = -k; i <= k; ++i) d.push_back(static_cast<double>(i) * step);
  };
  add(cfg.lineshape_span, cfg.lineshape_step);
  if (cfg.lineshape_fine_span > 0.0) add(cfg.lineshape_fine_span, cfg.lineshape_fine_step);
  std::sort(d.begin(), d.end());
  // merge coincident nodes (within a millihertz)
  std::vector<double> out;
  for (double x : d) {
    if (out.empty() || x - out.back() > 1e-3) out.push_back(x);
  }
  return out;
}

LineshapeResult lineshape_scan(const ExperimentConfig& cfg, const std::vector<double>& delta_hz) {
  cfg.validate();
  if (delta_hz.empty()) throw std::invalid_argument("lineshape_scan: empty detuning grid");
  require(std::is_sorted(delta_hz.begin(), delta_hz.end()), "lineshape detunings must be sorted");
  require(cfg.params.rabi > 0.0, "lineshape scan needs a nonzero Rabi frequency");
  const Simulator sim(cfg);

  const std::size_t n = delta_hz.size() + 1;
  std::vector<PulseMetrics> metrics(n);
  std::vector<IntegratorStats> stats(n);
  parallel_for(n, scan_threads(cfg), [&](std::size_t i) {
    const PulseSequence seq =
        i == 0 ? pi_pulse_sequence(cfg) : ramsey_sequence(cfg, hz_to_rad(delta_hz[i - 1]));
    const Trajectory traj = sim.run(seq);
    metrics[i] = pulse_metrics(traj, pump_end_of(seq), 0.0);
    stats[i] = traj.stats;
  });

  LineshapeResult out;
  out.reference = metrics[0];
  out.floor = cfg.floor_fraction * out.reference.peak_rate;
  for (const auto& s : stats) out.stats += s;
  for (std::size_t i = 1; i < n; ++i) {
    LineshapeRow row;
    row.delta_hz = delta_hz[i - 1];
    row.metrics = metrics[i];
    row.metrics.burst = row.metrics.peak_rate >= out.floor;
    row.traditional = traditional_ramsey_excitation(cfg.params.rabi, cfg.tau_p, cfg.free_time,
                                                    hz_to_rad(row.delta_hz));
    out.rows.push_back(row);
  }
  try {
    const auto pts = out.points();
    out.fringes = fringe_metrics(pts, cfg.free_time, cfg.tau_p);
  } catch (const std::invalid_argument& e) {
    out.fringe_error = e.what();
  }
  return out;
}

PeakScaling::PeakScaling(std::vector<double> atoms, std::vector<double> peaks)
    : atoms_(std::move(atoms)), peaks_(std::move(peaks)) {
  if (atoms_.size() != peaks_.size() || atoms_.empty()) {
    throw std::invalid_argument("PeakScaling: need matching, non-empty series");
  }
  if (atoms_.size() >= 2) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i] > 0.0) || !(peaks_[i] > 0.0)) {
        throw std::invalid_argument("PeakScaling: atom numbers and peaks must be positive");
      }
      lx.push_back(std::log(atoms_[i]));
      ly.push_back(std::log(peaks_[i]));
    }
    log_interp_.emplace(std::move(lx), std::move(ly));
  }
}

PeakScaling PeakScaling::capture(const ExperimentConfig& cfg, double n_min, double n_max,
                                 int points) {
  if (!(n_min > 0.0) || !(n_max >= n_min)) {
    throw std::invalid_argument("PeakScaling: need 0 < n_min <= n_max");
  }
  if (n_max == n_min) points = 1;
  points = std::max(points, 1);
  std::vector<double> atoms(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    atoms[static_cast<std::size_t>(k)] = std::exp(std::log(n_min) + f * (std::log(n_max) - std::log(n_min)));
  }
  atoms.back() = n_max;
  atoms.front() = n_min;
  std::vector<double> peaks(atoms.size());
  parallel_for(atoms.size(), scan_threads(cfg), [&](std::size_t i) {
    PhysicalParams p = cfg.params;
    p.n_atoms = atoms[i];
    const Simulator sim(cfg, p);
    const PulseSequence seq = ramsey_sequence(cfg, hz_to_rad(0.0));
    peaks[i] = pulse_metrics(sim.run(seq), pump_end_of(seq), 0.0).peak_rate;
  });
  return PeakScaling(std::move(atoms), std::move(peaks));
}

double PeakScaling::operator()(double n) const {
  if (!log_interp_) {
    if (n != atoms_.front()) throw std::out_of_range("PeakScaling: single-point table");
    return peaks_.front();
  }
  const double lx = std::log(n);
  // tolerate rounding at the table ends
  const double lo = log_interp_->front(), hi = log_interp_->back();
  if (lx < lo - 1e-12 || lx > hi + 1e-12) throw std::out_of_range("PeakScaling: N outside table");
  return std::exp((*log_interp_)(std::clamp(lx, lo, hi)));
}

LockRecord lock_loop(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.params.rabi > 0.0, "lock needs a nonzero Rabi frequency");
  const double frr = cfg.frr_hz();
  const double step = cfg.lock_step_hz();
  const int per_cycle = cfg.lock_iterations;
  const int total = per_cycle * cfg.lock_cycles;
  const double n0 = cfg.params.n_atoms;
  const double p_survive = cfg.lock_apply_loss ? cfg.loss.survival_per_sequence() : 1.0;

  // table covers the calibration window and the expected laser excursion
  const double excursion = std::abs(cfg.lock_initial_offset) +
                           5.0 * cfg.laser_noise * std::sqrt(static_cast<double>(total)) +
                           std::abs(cfg.drift_per_sequence) * total;
  const double half =
      std::max(0.4 * frr, excursion) + 0.5 * step + 2.0 * cfg.lock_table_resolution;
  const long k = static_cast<long>(std::ceil(half / cfg.lock_table_resolution));
  std::vector<double> table_grid;
  for (long i = -k; i <= k; ++i) table_grid.push_back(static_cast<double>(i) * cfg.lock_table_resolution);

  ExperimentConfig scan_cfg = cfg;
  scan_cfg.lineshape_span = half;
  const LineshapeResult table = lineshape_scan(scan_cfg, table_grid);
  const auto points = table.points();

  LockRecord rec;
  rec.floor = table.floor;
  CalibrationOptions opts;
  opts.step_hz = step;
  opts.frr_hz = frr;
  opts.floor = table.floor;
  opts.rabi = cfg.params.rabi;
  opts.tau_p = cfg.tau_p;
  opts.free_time = cfg.free_time;
  rec.calibration = fl_calibration(points, opts);
  const LineshapeInterpolator interp(points);

  std::optional<PeakScaling> scaling;
  if (cfg.lock_apply_loss && p_survive < 1.0 && cfg.lock_peak_source == PeakSource::table) {
    const double n_min = n0 * std::pow(p_survive, per_cycle - 1);
    scaling = PeakScaling::capture(cfg, n_min, n0);
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  double center = 0.0;                      // servo estimate, commanded
  double laser = cfg.lock_initial_offset;   // laser error
  double atoms = n0;
  double pair_peaks[2] = {0.0, 0.0};
  double correction_sum = 0.0;
  for (int it = 0; it < total; ++it) {
    const int cycle = it / per_cycle;
    if (it % per_cycle == 0) atoms = n0;  // reload
    const int half_idx = it % 2;
    LockIteration rowi;
    rowi.index = it;
    rowi.cycle = cycle;
    rowi.commanded_hz = center + (half_idx == 0 ? -0.5 : 0.5) * step;
    rowi.actual_hz = rowi.commanded_hz + laser;
    rowi.atoms = atoms;
    if (cfg.lock_peak_source == PeakSource::simulate) {
      PhysicalParams p = cfg.params;
      p.n_atoms = atoms;
      const Simulator sim(cfg, p);
      const PulseSequence seq = ramsey_sequence(cfg, hz_to_rad(rowi.actual_hz));
      rowi.peak_rate = pulse_metrics(sim.run(seq), pump_end_of(seq), 0.0).peak_rate;
    } else {
      if (rowi.actual_hz < interp.min_hz() || rowi.actual_hz > interp.max_hz()) {
        rec.termination = "lineshape support exceeded at iteration " + std::to_string(it);
        break;
      }
      const double scale = scaling ? (*scaling)(atoms) / (*scaling)(n0) : 1.0;
      rowi.peak_rate = interp(rowi.actual_hz) * scale;
    }
    rec.iterations.push_back(rowi);
    pair_peaks[half_idx] = rowi.peak_rate;

    if (half_idx == 1) {
      LockPair pair;
      pair.index = it / 2;
      pair.cycle = cycle;
      const double lo = pair_peaks[0], hi = pair_peaks[1];
      if ((lo <= rec.floor && hi <= rec.floor) || lo + hi == 0.0) {
        pair.fl = std::numeric_limits<double>::quiet_NaN();
        ++rec.excluded_pairs;
      } else {
        pair.fl = (hi - lo) / (hi + lo);
        pair.estimate_hz = rec.calibration.detuning_for(pair.fl);
        pair.correction_hz = -cfg.lock_gain * pair.estimate_hz;
      }
      center += pair.correction_hz;
      correction_sum += pair.correction_hz;
      pair.residual_hz = center + laser;
      rec.pairs.push_back(pair);
    }

    atoms *= p_survive;
    if (cfg.laser_noise > 0.0) laser += cfg.laser_noise * noise(rng);
    laser += cfg.drift_per_sequence;
  }

  std::vector<double> fl_sum(static_cast<std::size_t>(cfg.lock_cycles), 0.0);
  std::vector<int> fl_n(static_cast<std::size_t>(cfg.lock_cycles), 0);
  double fl_all = 0.0, res_sum = 0.0, res_sq = 0.0;
  int used = 0;
  for (const auto& p : rec.pairs) {
    res_sum += p.residual_hz;
    res_sq += p.residual_hz * p.residual_hz;
    if (std::isnan(p.fl)) continue;
    fl_sum[static_cast<std::size_t>(p.cycle)] += p.fl;
    ++fl_n[static_cast<std::size_t>(p.cycle)];
    fl_all += p.fl;
    ++used;
  }
  for (std::size_t c = 0; c < fl_sum.size(); ++c) {
    rec.cycle_fl_mean.push_back(fl_n[c] ? fl_sum[c] / fl_n[c]
                                        : std::numeric_limits<double>::quiet_NaN());
  }
  const double np = static_cast<double>(rec.pairs.size());
  if (np > 0) {
    rec.residual_mean_hz = res_sum / np;
    rec.residual_std_hz = std::sqrt(std::max(0.0, res_sq / np - rec.residual_mean_hz * rec.residual_mean_hz));
    rec.mean_correction_hz = correction_sum / np;
  }
  if (used == 0 && !rec.pairs.empty()) {
    throw std::invalid_argument("lock_loop: every FL pair is below the no-burst floor");
  }
  rec.fl_mean = used ? fl_all / used : 0.0;
  return rec;
}

double fit_decay_constant(const std::vector<double>& t, const std::vector<double>& n) {
  std::vector<double> ln;
  ln.reserve(n.size());
  for (double v : n) {
    if (!(v > 0.0)) throw std::invalid_argument("fit_decay_constant: atom numbers must be positive");
    ln.push_back(std::log(v));
  }
  const LinearFit f = linear_fit(t, ln);
  if (!(f.slope < 0.0)) return std::numeric_limits<double>::infinity();
  return -1.0 / f.slope;
}

RecycleResult recycle_run(const ExperimentConfig& cfg, int n_sequences) {
  cfg.validate();
  if (n_sequences < 1) throw std::invalid_argument("recycle_run: n_sequences must be >= 1");
  RecycleResult out;
  out.survival = cfg.loss.survival_per_sequence();
  const double n0 = cfg.params.n_atoms;
  for (int k = 0; k < n_sequences; ++k) {
    RecycleRow row;
    row.sequence = k;
    row.time = k * cfg.loss.cycle_time;
    row.atoms = n0 * std::pow(out.survival, k);
    if (row.atoms < cfg.min_atoms) {
      throw NumericalError("recycle_run: atom number " + std::to_string(row.atoms) +
                           " fell below the configured minimum at sequence " + std::to_string(k));
    }
    out.rows.push_back(row);
  }

  if (cfg.loss.mode == LossMode::pulsed_ramsey && cfg.params.rabi > 0.0) {
    if (cfg.recycle_peak_source == PeakSource::table) {
      out.scaling = PeakScaling::capture(cfg, out.rows.back().atoms, n0);
      for (auto& r : out.rows) r.peak_rate = (*out.scaling)(r.atoms);
    } else {
      parallel_for(out.rows.size(), scan_threads(cfg), [&](std::size_t i) {
        PhysicalParams p = cfg.params;
        p.n_atoms = out.rows[i].atoms;
        const Simulator sim(cfg, p);
        const PulseSequence seq = ramsey_sequence(cfg, hz_to_rad(0.0));
        out.rows[i].peak_rate = pulse_metrics(sim.run(seq), pump_end_of(seq), 0.0).peak_rate;
      });
    }
  }

  if (out.rows.size() >= 2) {
    std::vector<double> t, n;
    for (const auto& r : out.rows) {
      t.push_back(r.time);
      n.push_back(r.atoms);
    }
    out.fitted_tau = fit_decay_constant(t, n);
  } else {
    out.fitted_tau = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace ramsr
