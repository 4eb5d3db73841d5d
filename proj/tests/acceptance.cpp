// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Usage: ramsr_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ramsr/config.hpp"
#include "ramsr/experiments.hpp"
#include "ramsr/oracle_checks.hpp"
#include "ramsr/report.hpp"

using namespace ramsr;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int sig = 4) { return format_number(v, sig); }

ExperimentConfig paper() {
  ExperimentConfig c;  // Sr-88 defaults: gamma = 1/22 us, 2 uK Doppler width
  c.n_phase = 16;
  c.n_doppler = 3;
  return c;
}

ExperimentConfig ideal() {
  ExperimentConfig c;
  c.params.gamma = 0.0;
  c.params.doppler_sigma = 0.0;
  c.n_phase = 64;
  c.n_doppler = 1;
  return c;
}

double angle_of(const ExperimentConfig& c, double t_p) { return t_p * c.params.rabi / kPi; }

// The decohered scan feeds criteria 2, 3 and 8.
const ThresholdScanResult& decohered_scan() {
  static const ThresholdScanResult r = [] {
    ExperimentConfig c = paper();
    c.scan_min = 0.1;
    c.scan_max = 1.1;
    c.scan_points = 41;
    return threshold_scan(c, threshold_grid(c));
  }();
  return r;
}

Verdict ideal_threshold() {
  const ExperimentConfig c = ideal();
  const auto r = threshold_scan(c, threshold_grid(c));
  if (!r.fit) return {false, "no threshold: " + r.fit_error};
  return {std::abs(r.fit->proxy - 0.5) <= 0.02,
          "sin^2 threshold " + num(r.fit->proxy) + " (Omega t_P = " + num(r.fit->angle_over_pi) +
              " pi); target 0.50 +- 0.02"};
}

Verdict decohered_threshold() {
  const auto& r = decohered_scan();
  if (!r.fit) return {false, "no threshold: " + r.fit_error};
  return {std::abs(r.fit->angle_over_pi - 0.57) <= 0.03,
          "Omega t_P = " + num(r.fit->angle_over_pi) + " pi (sin^2 " + num(r.fit->proxy) +
              "); target 0.57 +- 0.03 pi"};
}

Verdict linear_scaling() {
  const auto& r = decohered_scan();
  std::vector<double> x, y;
  for (const auto& row : r.rows) {
    if (row.proxy < 0.62 || row.proxy > 0.90) continue;
    // only the rising branch, Omega t_P <= pi, is a separate excitation level
    if (angle_of(paper(), row.t_p) > 1.0) continue;
    x.push_back(row.proxy);
    y.push_back(row.metrics.peak_rate);
  }
  if (x.size() < 3) return {false, "fewer than 3 scan points in [0.62, 0.90]"};
  const auto lin = linear_fit(x, y);
  std::vector<double> x2;
  for (double v : x) x2.push_back(v * v);
  const auto quad = linear_fit(x2, y);
  return {lin.r_squared >= 0.98, "R^2 = " + num(lin.r_squared, 6) + " over " +
                                     std::to_string(x.size()) + " points (vs sin^4 fit " +
                                     num(quad.r_squared, 6) + "); target >= 0.98"};
}

Verdict revival() {
  const auto tr = run_trace(paper());
  const auto rate = tr.trajectory.channel(&Observables::photon_rate);
  const auto& t = tr.trajectory.times;
  std::size_t ipk = 0;
  for (std::size_t i = 0; i < rate.size(); ++i)
    if (t[i] >= tr.pump_end && rate[i] > rate[ipk]) ipk = i;
  // first local minimum after the peak, then the largest later maximum
  std::optional<std::size_t> imin;
  for (std::size_t i = ipk + 1; i + 1 < rate.size(); ++i) {
    if (rate[i] < rate[i - 1] && rate[i] <= rate[i + 1]) {
      imin = i;
      break;
    }
  }
  if (!imin) return {false, "photon rate decays monotonically after the peak"};
  std::optional<std::size_t> imax;
  for (std::size_t i = *imin + 1; i + 1 < rate.size(); ++i)
    if (rate[i] > rate[i - 1] && rate[i] >= rate[i + 1]) {
      imax = i;
      break;
    }
  if (!imax) return {false, "no local maximum after the post-peak minimum"};
  const double rise = (rate[*imax] - rate[*imin]) / rate[ipk];
  // a revival must stand clear of integration noise
  return {rise > 1e-4, "peak " + num(rate[ipk]) + " /s at " + num(t[ipk] * 1e6) +
                           " us, minimum at " + num(t[*imin] * 1e6) + " us, revival to " +
                           num(rate[*imax] / rate[ipk]) + " of peak at " +
                           num(t[*imax] * 1e6) + " us"};
}

Verdict fringe_geometry() {
  ExperimentConfig c = paper();
  c.n_phase = 8;
  c.n_doppler = 3;
  const auto r = lineshape_scan(c, lineshape_grid(c));
  if (!r.fringes) return {false, "no fringe metrics: " + r.fringe_error};
  const auto& f = *r.fringes;
  const bool spacing = std::abs(f.fringe_spacing - 200e3) <= 5e3;
  const bool width = std::abs(f.envelope_width - 3.33e6) <= 0.333e6;
  const bool zeros = f.zero_zone_fraction > 0.0;
  return {spacing && width && zeros,
          "spacing " + num(f.fringe_spacing / 1e3) + " kHz (200 +- 5)" + (spacing ? "" : " FAIL") +
              ", envelope " + num(f.envelope_width / 1e6) + " MHz (3.33 +- 10%)" +
              (width ? "" : " FAIL") + ", zero-zone fraction " + num(f.zero_zone_fraction) +
              (zeros ? "" : " FAIL")};
}

Verdict subradiance() {
  ExperimentConfig c = paper();
  c.trace_sequence = TraceSequence::ramsey;
  const auto tr = run_trace(c);
  const auto pi = run_trace(paper());
  const auto& seq = tr.sequence.segments;
  const double free_begin = seq[0].duration;
  const double free_end = free_begin + seq[1].duration;
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.trajectory.times.size(); ++i) {
    const double t = tr.trajectory.times[i];
    if (t >= free_begin && t <= free_end)
      worst = std::max(worst, tr.trajectory.samples[i].photon_rate);
  }
  const double ratio = worst / pi.metrics.peak_rate;
  return {ratio < 1e-2, "max rate during free evolution " + num(worst) + " /s = " + num(ratio) +
                            " of the pi-pulse peak; target < 1e-2"};
}

Verdict post_burst_population() {
  bool ok = true;
  std::ostringstream s;
  for (double s0 : {0.7, 0.85, 1.0}) {
    ExperimentConfig c = paper();
    c.params.gamma /= 10.0;
    c.params.doppler_sigma /= 10.0;
    c.pulse_area = 2.0 * std::asin(std::sqrt(s0)) / kPi;
    const auto tr = run_trace(c);
    // population left once the emission has run its course
    const double after = tr.trajectory.samples.back().mean_inversion;
    const bool hit = std::abs(after - (1.0 - s0)) <= 0.1;
    ok = ok && hit;
    s << "s0 " << num(s0, 3) << ": " << num(after, 3) << " (" << num(1.0 - s0, 3) << " +- 0.1)"
      << (hit ? "" : " FAIL") << (s0 < 1.0 ? "; " : "");
  }
  return {ok, s.str()};
}

Verdict delay_monotonic() {
  const auto& r = decohered_scan();
  const ExperimentConfig c = paper();
  const double noise = c.sample_dt;  // delays are read off the sample grid
  std::vector<std::pair<double, double>> curve;  // angle, delay
  for (const auto& row : r.rows) {
    const double a = angle_of(c, row.t_p);
    if (row.metrics.burst && a <= 1.0 + 1e-9) curve.emplace_back(a, row.metrics.delay);
  }
  if (curve.size() < 3) return {false, "fewer than 3 bursting points"};
  auto delay_at = [&](double a) {
    for (const auto& [ang, d] : curve)
      if (std::abs(ang - a) < 1e-6) return d;
    return std::nan("");
  };
  const double d_pi = delay_at(1.0), d_07 = delay_at(0.7);
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].second > curve[i - 1].second + noise) monotone = false;
  return {d_pi < d_07 && monotone,
          "delay(pi) " + num(d_pi * 1e6) + " us < delay(0.7 pi) " + num(d_07 * 1e6) + " us; " +
              std::to_string(curve.size()) + "-point curve " +
              (monotone ? "non-increasing" : "INCREASES") + " within " + num(noise * 1e9) +
              " ns"};
}

Verdict oracle_equivalence() {
  const auto checks = run_oracle_suite();
  bool ok = true;
  std::ostringstream s;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    ok = ok && c.passed;
    s << (i ? "; " : "") << c.name << " " << num(c.measured, 3) << "/" << num(c.tolerance, 2)
      << (c.passed ? "" : " FAIL");
  }
  return {ok, s.str()};
}

Verdict fl_behaviour() {
  ExperimentConfig c = paper();
  c.lock_initial_offset = 20e3;
  c.lock_iterations = 108;
  const auto rec = lock_loop(c);
  const auto& cal = rec.calibration;

  // FL at the origin and antisymmetry over +-0.3 FRR
  const double frr = c.frr_hz();
  double fl0 = std::nan(""), asym = 0.0;
  for (std::size_t i = 0; i < cal.detuning_hz.size(); ++i) {
    const double d = cal.detuning_hz[i];
    if (std::abs(d) < 1e-6) fl0 = cal.fl[i];
    if (std::abs(d) > 0.3 * frr + 1e-6 || d < 0.0) continue;
    for (std::size_t j = 0; j < cal.detuning_hz.size(); ++j)
      if (std::abs(cal.detuning_hz[j] + d) < 1e-6) {
        const double sum = cal.fl[i] + cal.fl[j];
        asym = std::isnan(sum) ? std::max(asym, 0.0) : std::max(asym, std::abs(sum));
      }
  }
  const bool origin = std::abs(fl0) <= 1e-3;
  const bool antisym = asym <= 1e-3;
  const bool steeper = std::abs(cal.slope_at_zero) > std::abs(cal.traditional_slope_at_zero);

  // first iteration after which the laser stays within 1 kHz
  std::optional<int> settled;
  for (std::size_t k = 0; k < rec.pairs.size(); ++k) {
    bool stays = true;
    for (std::size_t m = k; m < rec.pairs.size(); ++m)
      if (std::abs(rec.pairs[m].residual_hz) >= 1e3) stays = false;
    if (stays) {
      settled = 2 * static_cast<int>(k + 1);  // two sequences per pair
      break;
    }
  }
  const bool converges = settled && *settled <= 50;
  std::ostringstream s;
  s << "FL(0) " << num(fl0, 3) << (origin ? "" : " FAIL") << ", max |FL(d)+FL(-d)| " << num(asym, 3)
    << (antisym ? "" : " FAIL") << ", slope " << num(cal.slope_at_zero * 1e3) << " vs traditional "
    << num(cal.traditional_slope_at_zero * 1e3) << " per kHz" << (steeper ? "" : " FAIL")
    << ", lock from 20 kHz within 1 kHz after "
    << (settled ? std::to_string(*settled) : std::string("never")) << " iterations"
    << (converges ? "" : " FAIL") << " (" << rec.termination << ")";
  return {origin && antisym && steeper && converges, s.str()};
}

Verdict recycling() {
  bool ok = true;
  std::ostringstream s;
  const std::pair<LossMode, double> modes[] = {{LossMode::pulsed_ramsey, 0.313},
                                               {LossMode::no_pulses, 0.431},
                                               {LossMode::mot_continuous, 0.409}};
  for (const auto& [mode, tau] : modes) {
    ExperimentConfig c = paper();
    c.loss.mode = mode;
    c.loss.tau_loss = tau;
    const auto r = recycle_run(c, 100);
    const double dev = std::abs(r.fitted_tau - tau) / tau;
    ok = ok && dev <= 0.02;
    s << to_string(mode) << " " << num(r.fitted_tau * 1e3) << " ms (" << num(tau * 1e3) << ")"
      << (dev <= 0.02 ? "" : " FAIL") << (mode == LossMode::mot_continuous ? "" : "; ");
  }
  return {ok, s.str()};
}

std::map<std::string, double> scalar_metrics(const ExperimentConfig& c) {
  std::map<std::string, double> m;
  const auto tr = run_trace(c);
  m["pi peak rate"] = tr.metrics.peak_rate;
  m["pi delay"] = tr.metrics.delay;
  m["pi area"] = tr.metrics.area;
  ExperimentConfig s = c;
  s.scan_points = 21;
  const auto scan = threshold_scan(s, threshold_grid(s));
  if (scan.fit) {
    m["threshold sin^2"] = scan.fit->proxy;
    m["threshold slope"] = scan.fit->slope;
  }
  ExperimentConfig l = c;
  l.trace_sequence = TraceSequence::ramsey;
  const auto ramsey = run_trace(l);
  m["ramsey peak rate"] = ramsey.metrics.peak_rate;
  m["ramsey delay"] = ramsey.metrics.delay;
  return m;
}

Verdict determinism_convergence() {
  // byte-identical tables on rerun
  auto pc = default_config();
  set_value(pc, "protocol", "threshold-scan");
  apply_override(pc, "threshold.points=11");
  const auto a = run_protocol(pc);
  const auto b = run_protocol(pc);
  bool identical = a.tables.size() == b.tables.size();
  for (std::size_t i = 0; identical && i < a.tables.size(); ++i)
    identical = a.tables[i].to_csv() == b.tables[i].to_csv();

  // halving the tolerances
  const ExperimentConfig base = paper();
  ExperimentConfig tight = base;
  tight.integrator.rel_tol /= 2.0;
  tight.integrator.abs_tol /= 2.0;
  const auto m1 = scalar_metrics(base), m2 = scalar_metrics(tight);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [k, v] : m1) {
    const double rel = std::abs(m2.at(k) - v) / std::abs(v);
    if (rel >= worst) {
      worst = rel;
      worst_name = k;
    }
  }
  const bool converged = m1.size() == m2.size() && worst < 5e-3;
  return {identical && converged,
          std::string(identical ? "byte-identical rerun" : "rerun DIFFERS") +
              ", largest change under halved tolerance " + num(worst, 3) + " (" + worst_name +
              ", " + std::to_string(m1.size()) + " metrics); target < 5e-3"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"ideal threshold", ideal_threshold},
      {"decohered threshold", decohered_threshold},
      {"linear peak scaling", linear_scaling},
      {"oscillatory revival", revival},
      {"fringe geometry", fringe_geometry},
      {"subradiant protection", subradiance},
      {"post-burst population", post_burst_population},
      {"delay monotonicity", delay_monotonic},
      {"oracle equivalence", oracle_equivalence},
      {"frequency locator and lock", fl_behaviour},
      {"atom recycling", recycling},
      {"determinism and convergence", determinism_convergence},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
