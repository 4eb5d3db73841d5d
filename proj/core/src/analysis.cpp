#include "ramsr/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ramsr/params.hpp"

namespace ramsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double emission(const LineshapePoint& p) { return p.metrics.burst ? p.metrics.peak_rate : 0.0; }

void require_sorted(std::span<const LineshapePoint> ls, const char* who) {
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (!(ls[i].delta_hz > ls[i - 1].delta_hz)) {
      throw std::invalid_argument(std::string(who) + ": detunings must be strictly increasing");
    }
  }
}

double max_spacing(std::span<const LineshapePoint> ls, double lo, double hi) {
  double worst = 0.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (ls[i].delta_hz < lo || ls[i - 1].delta_hz > hi) continue;
    worst = std::max(worst, ls[i].delta_hz - ls[i - 1].delta_hz);
  }
  return worst;
}

using Mat2 = std::array<std::complex<double>, 4>;  // row-major

Mat2 pulse_propagator(double rabi, double delta, double t) {
  // H = [[0, rabi/2], [rabi/2, -delta]] in (g, e); global phase dropped.
  const double w = 0.5 * std::hypot(rabi, delta);
  const std::complex<double> i(0.0, 1.0);
  if (w == 0.0) return {1.0, 0.0, 0.0, 1.0};
  const double c = std::cos(w * t);
  const double s = std::sin(w * t) / w;
  return {c - i * s * (0.5 * delta), -i * s * (0.5 * rabi), -i * s * (0.5 * rabi),
          c + i * s * (0.5 * delta)};
}

}  // namespace

PulseMetrics pulse_metrics(const Trajectory& traj, double pump_end, double floor) {
  const double tol = 1e-12 * std::max(1.0, std::abs(pump_end));
  auto first = std::lower_bound(traj.times.begin(), traj.times.end(), pump_end - tol);
  const std::size_t i0 = static_cast<std::size_t>(first - traj.times.begin());
  if (traj.times.size() < i0 + 2) {
    throw std::invalid_argument("pulse_metrics: readout window holds fewer than two samples");
  }
  PulseMetrics m;
  m.peak_rate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = i0; i < traj.times.size(); ++i) {
    const double r = traj.samples[i].photon_rate;
    if (r > m.peak_rate) {
      m.peak_rate = r;
      m.peak_time = traj.times[i];
    }
    if (i > i0) {
      m.area += 0.5 * (r + traj.samples[i - 1].photon_rate) * (traj.times[i] - traj.times[i - 1]);
    }
  }
  m.delay = m.peak_time - pump_end;
  m.burst = m.peak_rate >= floor;
  return m;
}

double excitation_proxy(double pulse_area) {
  const double s = std::sin(0.5 * pulse_area);
  return s * s;
}

ThresholdFit detect_threshold(std::span<const ThresholdPoint> scan, ThresholdMetric metric) {
  if (scan.size() < 8) throw std::invalid_argument("detect_threshold: need at least 8 points");
  const auto bursts = std::count_if(scan.begin(), scan.end(),
                                    [](const ThresholdPoint& p) { return p.metrics.burst; });
  if (bursts == 0) throw std::invalid_argument("detect_threshold: no point shows a burst");
  if (static_cast<std::size_t>(bursts) == scan.size()) {
    throw std::invalid_argument("detect_threshold: every point shows a burst");
  }

  std::vector<std::pair<double, double>> pts;
  pts.reserve(scan.size());
  for (const auto& p : scan) {
    const double v = metric == ThresholdMetric::area ? p.metrics.area : p.metrics.peak_rate;
    pts.emplace_back(p.proxy, v);
  }
  std::sort(pts.begin(), pts.end());
  double ymax = 0.0;
  for (auto& [x, y] : pts) ymax = std::max(ymax, y);
  if (!(ymax > 0.0)) throw std::invalid_argument("detect_threshold: metric is identically zero");
  for (auto& [x, y] : pts) y /= ymax;

  double syy = 0.0;
  for (auto& [x, y] : pts) syy += y * y;
  auto sse = [&](double knee, double* slope) {
    double suy = 0.0, suu = 0.0;
    for (auto& [x, y] : pts) {
      const double u = std::max(0.0, x - knee);
      suy += u * y;
      suu += u * u;
    }
    if (suu == 0.0) {
      if (slope) *slope = 0.0;
      return syy;
    }
    if (slope) *slope = suy / suu;
    return syy - suy * suy / suu;
  };

  const double lo = pts.front().first;
  const double hi = pts.back().first;
  const int n_coarse = 2000;
  double best = lo, best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_coarse; ++k) {
    const double knee = lo + (hi - lo) * k / n_coarse;
    const double e = sse(knee, nullptr);
    if (e < best_sse) {
      best_sse = e;
      best = knee;
    }
  }
  // golden-section refinement inside the bracketing cells
  const double h = (hi - lo) / n_coarse;
  double a = std::max(lo, best - h), b = std::min(hi, best + h);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = sse(c, nullptr), fd = sse(d, nullptr);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = sse(c, nullptr);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = sse(d, nullptr);
    }
  }
  const double refined = 0.5 * (a + b);
  if (sse(refined, nullptr) < best_sse) best = refined;

  ThresholdFit fit;
  fit.proxy = best;
  const double e = sse(best, &fit.slope);
  fit.rms_residual = std::sqrt(std::max(0.0, e) / static_cast<double>(pts.size()));
  fit.angle_over_pi = 2.0 * std::asin(std::sqrt(std::clamp(best, 0.0, 1.0))) / std::numbers::pi;
  return fit;
}

FringeMetrics fringe_metrics(std::span<const LineshapePoint> ls, double free_time, double tau_p) {
  if (!(free_time > 0.0)) throw std::invalid_argument("fringe_metrics: free_time must be positive");
  if (tau_p < 0.0) throw std::invalid_argument("fringe_metrics: tau_p must be non-negative");
  if (ls.size() < 3) throw std::invalid_argument("fringe_metrics: need at least 3 points");
  require_sorted(ls, "fringe_metrics");
  const double frr = 1.0 / free_time;
  const double lo = ls.front().delta_hz, hi = ls.back().delta_hz;
  if (hi - lo < 3.0 * frr) {
    throw std::invalid_argument("fringe_metrics: lineshape spans fewer than three fringes");
  }
  if (max_spacing(ls, lo, hi) > frr / 10.0 * (1.0 + 1e-9)) {
    throw std::invalid_argument("fringe_metrics: insufficient resolution (grid coarser than 1/(10 T))");
  }

  const std::size_t n = ls.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = emission(ls[i]);

  FringeMetrics fm;
  fm.zero_zone_fraction =
      static_cast<double>(std::count(y.begin(), y.end(), 0.0)) / static_cast<double>(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (ls[i].metrics.burst != ls[i + 1].metrics.burst) {
      fm.kink_positions.push_back(0.5 * (ls[i].delta_hz + ls[i + 1].delta_hz));
    }
  }
  fm.envelope_resolved = !(ls.front().metrics.burst || ls.back().metrics.burst);

  // local maxima with parabolic refinement
  std::vector<std::pair<double, double>> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > 0.0) || y[i] < y[i - 1] || !(y[i] > y[i + 1])) continue;
    double x = ls[i].delta_hz, h = y[i];
    if (y[i - 1] > 0.0 && y[i + 1] > 0.0) {
      const double x0 = ls[i - 1].delta_hz, x1 = ls[i].delta_hz, x2 = ls[i + 1].delta_hz;
      const double d1 = (y[i] - y[i - 1]) / (x1 - x0);
      const double d2 = (y[i + 1] - y[i]) / (x2 - x1);
      const double curv = (d2 - d1) / (x2 - x0);
      if (curv < 0.0) {
        // vertex of the parabola through the three points
        const double b = d1 - curv * (x0 + x1);
        const double xv = -b / (2.0 * curv);
        if (xv > x0 && xv < x2) {
          x = xv;
          h = y[i - 1] + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1);
        }
      }
    }
    maxima.emplace_back(x, h);
  }
  // merge maxima closer than half a fringe
  std::vector<std::pair<double, double>> merged;
  for (const auto& m : maxima) {
    if (!merged.empty() && m.first - merged.back().first < 0.5 * frr) {
      if (m.second > merged.back().second) merged.back() = m;
    } else {
      merged.push_back(m);
    }
  }
  for (const auto& [x, h] : merged) {
    fm.maxima_hz.push_back(x);
    fm.maxima_height.push_back(h);
  }
  if (merged.size() < 2) {
    fm.fringe_spacing = kNaN;
    if (merged.size() == 1) {
      // one fringe: the support of the bursting region is the envelope
      double l = merged[0].first, r = merged[0].first;
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0) {
          l = std::min(l, ls[i].delta_hz);
          r = std::max(r, ls[i].delta_hz);
        }
      }
      fm.envelope_width = r - l;
    }
    return fm;
  }

  // spacing from up to five maxima centred on the tallest one
  const std::size_t top = static_cast<std::size_t>(
      std::max_element(merged.begin(), merged.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; }) -
      merged.begin());
  std::size_t first = top >= 2 ? top - 2 : 0;
  std::size_t last = std::min(merged.size() - 1, first + 4);
  if (last - first < 4 && last + 1 == merged.size()) first = last >= 4 ? last - 4 : 0;
  fm.fringe_spacing = (merged[last].first - merged[first].first) / static_cast<double>(last - first);

  // envelope edges: extrapolate the outermost maxima linearly to zero height,
  // at most one fringe beyond the last maximum
  const double sp = fm.fringe_spacing;
  auto edge = [&](std::size_t outer, std::size_t inner, double dir) {
    const double xo = merged[outer].first, ho = merged[outer].second;
    const double hi_ = merged[inner].second;
    if (hi_ > ho) {
      const double reach = ho * std::abs(xo - merged[inner].first) / (hi_ - ho);
      return xo + dir * std::min(reach, sp);
    }
    return xo + dir * 0.5 * sp;
  };
  const std::size_t m = merged.size();
  fm.envelope_width = edge(m - 1, m - 2, +1.0) - edge(0, 1, -1.0);
  return fm;
}

double traditional_ramsey_excitation(double rabi, double tau_p, double free_time, double delta) {
  const Mat2 u = pulse_propagator(rabi, delta, tau_p);
  // start in |g>: first column of U
  std::complex<double> g = u[0], e = u[2];
  e *= std::exp(std::complex<double>(0.0, delta * free_time));
  const std::complex<double> e2 = u[2] * g + u[3] * e;
  return std::norm(e2);
}

FrequencyLocator frequency_locator(std::span<const double> peaks, double floor) {
  if (peaks.size() < 2) throw std::invalid_argument("frequency_locator: need at least two peaks");
  FrequencyLocator fl;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < peaks.size(); i += 2) {
    const double p1 = peaks[i], p2 = peaks[i + 1];
    if (!std::isfinite(p1) || !std::isfinite(p2) || p1 < 0.0 || p2 < 0.0) {
      throw std::invalid_argument("frequency_locator: peaks must be finite and non-negative");
    }
    if ((p1 <= floor && p2 <= floor) || p1 + p2 == 0.0) {
      fl.per_pair.push_back(kNaN);
      ++fl.pairs_excluded;
      continue;
    }
    const double v = (p2 - p1) / (p2 + p1);
    fl.per_pair.push_back(v);
    sum += v;
    ++fl.pairs_used;
  }
  if (fl.pairs_used == 0) {
    throw std::invalid_argument("frequency_locator: every pair is below the no-burst floor");
  }
  fl.value = sum / static_cast<double>(fl.pairs_used);
  return fl;
}

LineshapeInterpolator::LineshapeInterpolator(std::span<const LineshapePoint> ls)
    : interp_([&] {
        require_sorted(ls, "LineshapeInterpolator");
        std::vector<double> x;
        x.reserve(ls.size());
        for (const auto& p : ls) x.push_back(p.delta_hz);
        return x;
      }(),
              [&] {
                std::vector<double> y;
                y.reserve(ls.size());
                for (const auto& p : ls) y.push_back(emission(p));
                return y;
              }()) {}

double LineshapeInterpolator::operator()(double delta_hz) const {
  return std::max(0.0, interp_(delta_hz));
}

double FlCalibration::detuning_for(double v) const {
  if (branch_end <= branch_begin + 1) throw std::logic_error("FlCalibration: empty branch");
  // FL decreases with detuning on the branch (a higher second peak means the
  // laser sits below resonance), but handle either orientation.
  const double f0 = fl[branch_begin], f1 = fl[branch_end - 1];
  const bool decreasing = f1 < f0;
  if (decreasing ? v >= f0 : v <= f0) return detuning_hz[branch_begin];
  if (decreasing ? v <= f1 : v >= f1) return detuning_hz[branch_end - 1];
  for (std::size_t i = branch_begin; i + 1 < branch_end; ++i) {
    const double a = fl[i], b = fl[i + 1];
    if ((v - a) * (v - b) <= 0.0) {
      if (a == b) return detuning_hz[i];
      return detuning_hz[i] + (v - a) / (b - a) * (detuning_hz[i + 1] - detuning_hz[i]);
    }
  }
  return detuning_hz[branch_end - 1];
}

FlCalibration fl_calibration(std::span<const LineshapePoint> ls, const CalibrationOptions& o) {
  if (!(o.step_hz > 0.0) || !(o.frr_hz > 0.0) || !(o.range_frr > 0.0) || o.points < 3) {
    throw std::invalid_argument("fl_calibration: step, frr, range must be positive and points >= 3");
  }
  const LineshapeInterpolator interp(ls);
  const double half_range = o.range_frr * o.frr_hz;
  const double need_lo = -half_range - 0.5 * o.step_hz;
  const double need_hi = half_range + 0.5 * o.step_hz;
  if (need_lo < interp.min_hz() || need_hi > interp.max_hz()) {
    throw std::invalid_argument("fl_calibration: stepped detunings leave the lineshape support");
  }
  if (max_spacing(ls, need_lo, need_hi) > o.step_hz / 5.0 * (1.0 + 1e-9)) {
    throw std::invalid_argument("fl_calibration: lineshape is coarser than step/5");
  }

  auto fl_at = [&](double center) {
    const double lo = interp(center - 0.5 * o.step_hz);
    const double hi = interp(center + 0.5 * o.step_hz);
    if ((lo <= o.floor && hi <= o.floor) || lo + hi == 0.0) return kNaN;
    return (hi - lo) / (hi + lo);
  };
  auto fl_trad = [&](double center) {
    const double lo =
        traditional_ramsey_excitation(o.rabi, o.tau_p, o.free_time, hz_to_rad(center - 0.5 * o.step_hz));
    const double hi =
        traditional_ramsey_excitation(o.rabi, o.tau_p, o.free_time, hz_to_rad(center + 0.5 * o.step_hz));
    return (hi - lo) / (hi + lo);
  };

  FlCalibration cal;
  cal.step_hz = o.step_hz;
  cal.frr_hz = o.frr_hz;
  for (std::size_t k = 0; k < o.points; ++k) {
    const double c = -half_range + 2.0 * half_range * static_cast<double>(k) /
                                       static_cast<double>(o.points - 1);
    cal.detuning_hz.push_back(c);
    cal.fl.push_back(fl_at(c));
    cal.fl_traditional.push_back(o.rabi > 0.0 ? fl_trad(c) : kNaN);
  }
  const double h = std::min(o.frr_hz / 200.0, 0.25 * o.step_hz);
  cal.slope_at_zero = (fl_at(h) - fl_at(-h)) / (2.0 * h);
  if (o.rabi > 0.0) cal.traditional_slope_at_zero = (fl_trad(h) - fl_trad(-h)) / (2.0 * h);

  // monotone branch containing the node closest to zero
  std::size_t mid = 0;
  for (std::size_t k = 1; k < cal.detuning_hz.size(); ++k) {
    if (std::abs(cal.detuning_hz[k]) < std::abs(cal.detuning_hz[mid])) mid = k;
  }
  if (std::isnan(cal.fl[mid])) {
    cal.branch_begin = cal.branch_end = mid;
    return cal;
  }
  const double sign = cal.slope_at_zero < 0.0 ? -1.0 : 1.0;
  std::size_t b = mid, e = mid + 1;
  while (b > 0 && !std::isnan(cal.fl[b - 1]) && sign * (cal.fl[b] - cal.fl[b - 1]) > 0.0) --b;
  while (e < cal.fl.size() && !std::isnan(cal.fl[e]) && sign * (cal.fl[e] - cal.fl[e - 1]) > 0.0) ++e;
  cal.branch_begin = b;
  cal.branch_end = e;
  return cal;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit: need at least two points of matching size");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace ramsr
