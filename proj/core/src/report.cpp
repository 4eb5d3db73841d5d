#include "ramsr/report.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace ramsr {

namespace {

Column real(std::string name) { return {std::move(name), ColumnKind::real}; }
Column integer(std::string name) { return {std::move(name), ColumnKind::integer}; }
Column flag(std::string name) { return {std::move(name), ColumnKind::flag}; }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return format_number(v, 6); }

void fill_config(RunManifest& m, const ParsedConfig& parsed) {
  m.version = software_version();
  m.protocol = to_string(parsed.config.protocol);
  m.config_hash = parsed.hash();
  m.config_canonical = parsed.canonical();
  m.config_values.assign(parsed.values.begin(), parsed.values.end());
  m.explicit_keys.assign(parsed.explicit_keys.begin(), parsed.explicit_keys.end());
}

void summarize_pulse(RunManifest& m, const std::string& prefix, const PulseMetrics& p) {
  m.summary.emplace_back(prefix + "peak_rate_per_s", p.peak_rate);
  m.summary.emplace_back(prefix + "peak_time_s", p.peak_time);
  m.summary.emplace_back(prefix + "delay_s", p.delay);
  m.summary.emplace_back(prefix + "area_photons", p.area);
  m.summary.emplace_back(prefix + "burst", p.burst ? 1.0 : 0.0);
}

void run_trace_protocol(const ExperimentConfig& cfg, RunOutput& out) {
  const TraceResult r = run_trace(cfg);
  out.tables.push_back(trace_table(r.trajectory));
  auto& m = out.manifest;
  m.integrator = r.trajectory.stats;
  m.warnings.insert(m.warnings.end(), r.warnings.begin(), r.warnings.end());
  m.summary.emplace_back("pump_end_s", r.pump_end);
  summarize_pulse(m, "", r.metrics);
  m.summary.emplace_back("final_mean_inversion", r.trajectory.samples.back().mean_inversion);
  out.report.push_back("peak photon rate " + fmt(r.metrics.peak_rate) + " /s, delay " +
                       fmt(r.metrics.delay) + " s, emitted " + fmt(r.metrics.area) + " photons");
}

void run_threshold_protocol(const ExperimentConfig& cfg, RunOutput& out) {
  const ThresholdScanResult r = threshold_scan(cfg, threshold_grid(cfg));
  out.tables.push_back(threshold_table(r));
  auto& m = out.manifest;
  m.integrator = r.stats;
  m.summary.emplace_back("floor_per_s", r.floor);
  summarize_pulse(m, "pi_", r.reference);
  m.notes.emplace_back("threshold_metric", to_string(cfg.threshold_metric));
  if (r.fit) {
    m.summary.emplace_back("threshold_sin2", r.fit->proxy);
    m.summary.emplace_back("threshold_angle_over_pi", r.fit->angle_over_pi);
    m.summary.emplace_back("threshold_fit_slope", r.fit->slope);
    m.summary.emplace_back("threshold_fit_rms", r.fit->rms_residual);
    out.report.push_back("threshold at sin^2 = " + fmt(r.fit->proxy) + " (Omega t_P = " +
                         fmt(r.fit->angle_over_pi) + " pi)");
  } else {
    m.summary.emplace_back("threshold_sin2", kNaN);
    m.warnings.push_back("no threshold: " + r.fit_error);
    out.report.push_back("no threshold: " + r.fit_error);
  }
}

void run_lineshape_protocol(const ExperimentConfig& cfg, RunOutput& out) {
  const LineshapeResult r = lineshape_scan(cfg, lineshape_grid(cfg));
  out.tables.push_back(lineshape_table(r));
  out.tables.push_back(lineshape_reference_table(r));
  auto& m = out.manifest;
  m.integrator = r.stats;
  m.summary.emplace_back("floor_per_s", r.floor);
  summarize_pulse(m, "pi_", r.reference);
  if (r.fringes) {
    const auto& f = *r.fringes;
    m.summary.emplace_back("fringe_spacing_hz", f.fringe_spacing);
    m.summary.emplace_back("envelope_width_hz", f.envelope_width);
    m.summary.emplace_back("zero_zone_fraction", f.zero_zone_fraction);
    m.summary.emplace_back("kinks", static_cast<double>(f.kink_positions.size()));
    if (!f.envelope_resolved) m.warnings.push_back("bursts reach the edge of the detuning grid");
    out.report.push_back("fringe spacing " + fmt(f.fringe_spacing) + " Hz, envelope width " +
                         fmt(f.envelope_width) + " Hz, zero zones " + fmt(f.zero_zone_fraction));
  } else {
    m.warnings.push_back("no fringe metrics: " + r.fringe_error);
    out.report.push_back("no fringe metrics: " + r.fringe_error);
  }
}

void run_lock_protocol(const ExperimentConfig& cfg, RunOutput& out) {
  const LockRecord r = lock_loop(cfg);
  out.tables.push_back(lock_iteration_table(r));
  out.tables.push_back(lock_pair_table(r));
  out.tables.push_back(lock_calibration_table(r));
  auto& m = out.manifest;
  m.summary.emplace_back("fl_mean", r.fl_mean);
  m.summary.emplace_back("residual_mean_hz", r.residual_mean_hz);
  m.summary.emplace_back("residual_std_hz", r.residual_std_hz);
  m.summary.emplace_back("mean_correction_hz", r.mean_correction_hz);
  m.summary.emplace_back("excluded_pairs", static_cast<double>(r.excluded_pairs));
  m.summary.emplace_back("fl_slope_per_hz", r.calibration.slope_at_zero);
  m.summary.emplace_back("fl_traditional_slope_per_hz", r.calibration.traditional_slope_at_zero);
  m.summary.emplace_back("floor_per_s", r.floor);
  m.notes.emplace_back("termination", r.termination);
  if (r.termination != "completed") m.warnings.push_back("lock terminated: " + r.termination);
  out.report.push_back("residual " + fmt(r.residual_mean_hz) + " +- " + fmt(r.residual_std_hz) +
                       " Hz over " + std::to_string(r.pairs.size()) + " pairs (" + r.termination +
                       ")");
}

void run_recycle_protocol(const ExperimentConfig& cfg, RunOutput& out) {
  const RecycleResult r = recycle_run(cfg, cfg.recycle_sequences);
  out.tables.push_back(recycle_table(r));
  auto& m = out.manifest;
  m.summary.emplace_back("survival_per_sequence", r.survival);
  m.summary.emplace_back("fitted_tau_s", r.fitted_tau);
  m.notes.emplace_back("loss_mode", to_string(cfg.loss.mode));
  out.report.push_back("fitted decay constant " + fmt(r.fitted_tau) + " s");
}

void run_oracle_protocol(RunOutput& out) {
  const auto checks = run_oracle_suite();
  out.tables.push_back(oracle_table(checks));
  auto& m = out.manifest;
  std::size_t index = 0;
  for (const auto& c : checks) {
    m.notes.emplace_back("check_" + std::to_string(index++), c.name + ": " + c.detail);
    std::ostringstream line;
    line << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << fmt(c.measured) << " (tolerance "
         << fmt(c.tolerance) << ")";
    if (!c.detail.empty()) line << " [" << c.detail << "]";
    out.report.push_back(line.str());
    if (!c.passed) out.checks_passed = false;
  }
  m.summary.emplace_back("checks_failed", out.checks_passed ? 0.0 : 1.0);
}

}  // namespace

Table trace_table(const Trajectory& traj) {
  Table t{"trace",
          {real("t_s"), real("photon_rate_per_s"), real("intracavity_photons"),
           real("mean_inversion"), real("collective_coherence"), real("total_excitation")},
          {}};
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& o = traj.samples[i];
    t.add_row({traj.times[i], o.photon_rate, o.intracavity_photons, o.mean_inversion,
               o.collective_coherence, o.total_excitation});
  }
  return t;
}

Table threshold_table(const ThresholdScanResult& r) {
  Table t{"threshold",
          {real("t_P_s"), real("sin2_proxy"), real("peak_rate_per_s"), real("area_photons"),
           real("delay_s"), flag("burst_flag")},
          {}};
  for (const auto& row : r.rows) {
    t.add_row({row.t_p, row.proxy, row.metrics.peak_rate, row.metrics.area, row.metrics.delay,
               row.metrics.burst ? 1.0 : 0.0});
  }
  return t;
}

Table lineshape_table(const LineshapeResult& r) {
  Table t{"lineshape",
          {real("delta_a_hz"), real("peak_rate_per_s"), real("area_photons"), flag("burst_flag")},
          {}};
  for (const auto& row : r.rows) {
    t.add_row({row.delta_hz, row.metrics.peak_rate, row.metrics.area, row.metrics.burst ? 1.0 : 0.0});
  }
  return t;
}

Table lineshape_reference_table(const LineshapeResult& r) {
  Table t{"lineshape_reference", {real("delta_a_hz"), real("traditional_excitation")}, {}};
  for (const auto& row : r.rows) t.add_row({row.delta_hz, row.traditional});
  return t;
}

Table lock_iteration_table(const LockRecord& r) {
  Table t{"lock_iterations",
          {integer("iteration"), integer("cycle"), real("commanded_hz"), real("actual_hz"),
           real("peak_rate_per_s"), real("atoms")},
          {}};
  for (const auto& it : r.iterations) {
    t.add_row({static_cast<double>(it.index), static_cast<double>(it.cycle), it.commanded_hz,
               it.actual_hz, it.peak_rate, it.atoms});
  }
  return t;
}

Table lock_pair_table(const LockRecord& r) {
  Table t{"lock_pairs",
          {integer("pair"), integer("cycle"), real("fl"), real("estimate_hz"), real("correction_hz"),
           real("residual_hz")},
          {}};
  for (const auto& p : r.pairs) {
    t.add_row({static_cast<double>(p.index), static_cast<double>(p.cycle), p.fl, p.estimate_hz,
               p.correction_hz, p.residual_hz});
  }
  return t;
}

Table lock_calibration_table(const LockRecord& r) {
  Table t{"lock_calibration", {real("delta_a_hz"), real("fl"), real("fl_traditional")}, {}};
  const auto& c = r.calibration;
  for (std::size_t i = 0; i < c.detuning_hz.size(); ++i) {
    t.add_row({c.detuning_hz[i], c.fl[i], c.fl_traditional[i]});
  }
  return t;
}

Table recycle_table(const RecycleResult& r) {
  Table t{"recycle",
          {integer("sequence"), real("time_s"), real("atoms"), real("peak_rate_per_s")},
          {}};
  for (const auto& row : r.rows) {
    t.add_row({static_cast<double>(row.sequence), row.time, row.atoms, row.peak_rate});
  }
  return t;
}

Table oracle_table(const std::vector<OracleCheck>& checks) {
  Table t{"oracle_checks",
          {integer("check"), real("measured"), real("tolerance"), flag("passed")},
          {}};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    t.add_row({static_cast<double>(i), checks[i].measured, checks[i].tolerance,
               checks[i].passed ? 1.0 : 0.0});
  }
  return t;
}

RunOutput run_protocol(const ParsedConfig& parsed) {
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  fill_config(out.manifest, parsed);
  const ExperimentConfig& cfg = parsed.config;
  switch (cfg.protocol) {
    case Protocol::trace: run_trace_protocol(cfg, out); break;
    case Protocol::threshold_scan: run_threshold_protocol(cfg, out); break;
    case Protocol::lineshape: run_lineshape_protocol(cfg, out); break;
    case Protocol::lock: run_lock_protocol(cfg, out); break;
    case Protocol::recycle: run_recycle_protocol(cfg, out); break;
    case Protocol::oracle_check: run_oracle_protocol(out); break;
  }
  out.manifest.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ramsr
