#include "ramsr/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ramsr/error.hpp"

namespace ramsr {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) {
    throw std::invalid_argument("IntegratorConfig: rel_tol must be in (0, 1e-2]");
  }
  if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) {
    throw std::invalid_argument("IntegratorConfig: abs_tol must be in (0, 1e-2]");
  }
  if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be > 0");
  if (!(initial_step >= 0.0)) {
    throw std::invalid_argument("IntegratorConfig: initial_step must be >= 0");
  }
}

IntegratorStats& IntegratorStats::operator+=(const IntegratorStats& other) {
  accepted += other.accepted;
  rejected += other.rejected;
  rhs_evals += other.rhs_evals;
  if (smallest_step == 0.0 || (other.smallest_step > 0.0 && other.smallest_step < smallest_step)) {
    smallest_step = other.smallest_step;
  }
  return *this;
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double state_norm(std::span<const cplx> y) {
  double acc = 0.0;
  for (const cplx& v : y) acc += std::norm(v);
  return std::sqrt(acc);
}

[[noreturn]] void fail(const std::string& what, double t, std::span<const cplx> y) {
  std::ostringstream os;
  os << what << " at t = " << t << " s (state norm " << state_norm(y) << ")";
  throw NumericalError(os.str());
}

double scaled_rms(std::span<const cplx> v, std::span<const cplx> y, const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
    acc += std::norm(v[i]) / (sk * sk);
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

class DormandPrince {
 public:
  DormandPrince(const OdeRhs& rhs, std::size_t n, const IntegratorConfig& cfg)
      : rhs_(rhs), cfg_(cfg), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), tmp_(n),
        y1_(n), r2_(n), r3_(n), r4_(n), r5_(n) {}

  IntegratorStats run(StateVector& y, double t0, double t1, std::span<const double> samples,
                      const SampleFn& on_sample) {
    IntegratorStats stats;
    const std::size_t n = y.size();
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= t0) {
      on_sample(samples[next], y);
      ++next;
    }
    if (t1 <= t0) return stats;

    rhs_(t0, y, k1_);
    ++stats.rhs_evals;
    const double span = t1 - t0;
    double h = cfg_.initial_step > 0.0 ? cfg_.initial_step : initial_step(y, t0, stats);
    h = std::min({h, cfg_.max_step, span});
    double t = t0;
    double facold = 1e-4;
    const double min_step = 1e-13 * std::max(std::abs(t0), std::abs(t1)) + 1e-300;
    int nan_retries = 0;

    while (t < t1) {
      bool last = false;
      if (t + 1.01 * h >= t1) {
        h = t1 - t;
        last = true;
      }
      if (h < min_step) fail("step size underflow", t, y);

      stage(y, h, {a21}, {&k1_}, tmp_);
      rhs_(t + c2 * h, tmp_, k2_);
      stage(y, h, {a31, a32}, {&k1_, &k2_}, tmp_);
      rhs_(t + c3 * h, tmp_, k3_);
      stage(y, h, {a41, a42, a43}, {&k1_, &k2_, &k3_}, tmp_);
      rhs_(t + c4 * h, tmp_, k4_);
      stage(y, h, {a51, a52, a53, a54}, {&k1_, &k2_, &k3_, &k4_}, tmp_);
      rhs_(t + c5 * h, tmp_, k5_);
      stage(y, h, {a61, a62, a63, a64, a65}, {&k1_, &k2_, &k3_, &k4_, &k5_}, tmp_);
      rhs_(t + h, tmp_, k6_);
      stage(y, h, {a71, 0.0, a73, a74, a75, a76}, {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_}, y1_);
      rhs_(t + h, y1_, k7_);
      stats.rhs_evals += 6;

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                            e6 * k6_[i] + e7 * k7_[i]);
        const double sk =
            cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y1_[i]));
        err += std::norm(e) / (sk * sk);
      }
      err = std::sqrt(err / static_cast<double>(n));

      if (!std::isfinite(err)) {
        if (++nan_retries > 20) fail("non-finite state", t, y);
        h *= 0.1;
        ++stats.rejected;
        continue;
      }
      nan_retries = 0;

      constexpr double beta = 0.04;
      constexpr double safe = 0.9;
      const double fac11 = std::pow(err, 0.2 - 0.75 * beta);
      if (err <= 1.0) {
        // Dense output coefficients for (t, t + h].
        for (std::size_t i = 0; i < n; ++i) {
          const cplx ydiff = y1_[i] - y[i];
          const cplx bspl = h * k1_[i] - ydiff;
          r2_[i] = ydiff;
          r3_[i] = bspl;
          r4_[i] = ydiff - h * k7_[i] - bspl;
          r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                        d7 * k7_[i]);
        }
        const double t_new = last ? t1 : t + h;
        while (next < samples.size() && samples[next] <= t_new) {
          const double theta = std::clamp((samples[next] - t) / h, 0.0, 1.0);
          const double theta1 = 1.0 - theta;
          for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = y[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
          }
          if (theta == 1.0) std::copy(y1_.begin(), y1_.end(), tmp_.begin());
          on_sample(samples[next], tmp_);
          ++next;
        }
        std::swap(y, y1_);
        if (y.size() != n) y1_.resize(n);
        std::swap(k1_, k7_);
        ++stats.accepted;
        if (stats.smallest_step == 0.0 || h < stats.smallest_step) stats.smallest_step = h;
        t = t_new;
        for (const cplx& v : y) {
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail("non-finite state", t, y);
        }
        double fac = fac11 / std::pow(facold, beta);
        fac = std::clamp(fac / safe, 0.1, 5.0);
        facold = std::max(err, 1e-4);
        h = std::min(h / fac, cfg_.max_step);
      } else {
        ++stats.rejected;
        h /= std::min(5.0, fac11 / safe);
      }
    }
    return stats;
  }

 private:
  void stage(std::span<const cplx> y, double h, std::initializer_list<double> coeffs,
             std::initializer_list<const StateVector*> ks, StateVector& out) const {
    const std::size_t n = y.size();
    std::copy(y.begin(), y.end(), out.begin());
    auto c = coeffs.begin();
    for (const StateVector* k : ks) {
      const double a = *c++ * h;
      if (a == 0.0) continue;
      const cplx* kp = k->data();
      for (std::size_t i = 0; i < n; ++i) out[i] += a * kp[i];
    }
  }

  double initial_step(std::span<const cplx> y, double t, IntegratorStats& stats) {
    const double d0 = scaled_rms(y, y, cfg_);
    const double d1n = scaled_rms(k1_, y, cfg_);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 * cfg_.max_step : 0.01 * d0 / d1n;
    h0 = std::min(h0, cfg_.max_step);
    for (std::size_t i = 0; i < y.size(); ++i) tmp_[i] = y[i] + h0 * k1_[i];
    rhs_(t + h0, tmp_, k2_);
    ++stats.rhs_evals;
    for (std::size_t i = 0; i < y.size(); ++i) k3_[i] = k2_[i] - k1_[i];
    const double d2 = scaled_rms(k3_, y, cfg_) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min(100.0 * h0, h1);
  }

  const OdeRhs& rhs_;
  const IntegratorConfig& cfg_;
  StateVector k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y1_, r2_, r3_, r4_, r5_;
};

IntegratorStats run_rk4(const OdeRhs& rhs, StateVector& y, double t0, double t1,
                        std::span<const double> samples, const IntegratorConfig& cfg,
                        const SampleFn& on_sample) {
  IntegratorStats stats;
  const std::size_t n = y.size();
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= t0) {
    on_sample(samples[next], y);
    ++next;
  }
  if (t1 <= t0) return stats;
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / cfg.max_step - 1e-9));
  const double h = (t1 - t0) / static_cast<double>(steps);
  StateVector k1(n), k2(n), k3(n), k4(n), tmp(n), y_new(n), f_new(n), interp(n);
  rhs(t0, y, k1);
  ++stats.rhs_evals;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = t0 + static_cast<double>(step) * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y_new[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double t_new = step + 1 == steps ? t1 : t + h;
    rhs(t_new, y_new, f_new);
    stats.rhs_evals += 4;
    // Cubic Hermite dense output between the step end points.
    while (next < samples.size() && samples[next] <= t_new) {
      const double s = std::clamp((samples[next] - t) / h, 0.0, 1.0);
      const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
      const double h10 = s * (1 - s) * (1 - s);
      const double h01 = s * s * (3 - 2 * s);
      const double h11 = s * s * (s - 1);
      for (std::size_t i = 0; i < n; ++i) {
        interp[i] = h00 * y[i] + h10 * h * k1[i] + h01 * y_new[i] + h11 * h * f_new[i];
      }
      on_sample(samples[next], s == 1.0 ? std::span<const cplx>(y_new) : interp);
      ++next;
    }
    std::swap(y, y_new);
    std::swap(k1, f_new);
    ++stats.accepted;
    for (const cplx& v : y) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail("non-finite state", t_new, y);
    }
  }
  stats.smallest_step = h;
  return stats;
}

}  // namespace

IntegratorStats solve_ode(const OdeRhs& rhs, StateVector& y, double t0, double t1,
                          std::span<const double> sample_times, const IntegratorConfig& cfg,
                          const SampleFn& on_sample) {
  cfg.validate();
  if (!(t1 >= t0)) throw std::invalid_argument("solve_ode: t1 < t0");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 || sample_times[i] > t1 ||
        (i > 0 && sample_times[i] < sample_times[i - 1])) {
      throw std::invalid_argument("solve_ode: sample times must be sorted and within [t0, t1]");
    }
  }
  for (const cplx& v : y) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("solve_ode: initial state is not finite");
    }
  }
  if (cfg.method == Method::fixed_rk4) {
    return run_rk4(rhs, y, t0, t1, sample_times, cfg, on_sample);
  }
  DormandPrince dp(rhs, y.size(), cfg);
  return dp.run(y, t0, t1, sample_times, on_sample);
}

std::vector<double> Trajectory::channel(double Observables::*field) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& o : samples) out.push_back(o.*field);
  return out;
}

std::vector<double> sample_grid(const PulseSequence& seq) {
  seq.validate();
  const std::vector<double> bounds = seq.boundaries();
  const double total = bounds.back();
  const double tol = 1e-9 * seq.sample_dt;
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor(total / seq.sample_dt + 1e-9));
  grid.reserve(count + bounds.size() + 1);
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(static_cast<double>(k) * seq.sample_dt);
  // Segment boundaries replace any grid point within tol.
  std::vector<double> merged;
  merged.reserve(grid.size() + bounds.size());
  std::size_t b = 0;
  for (double t : grid) {
    while (b < bounds.size() && bounds[b] < t - tol) merged.push_back(bounds[b++]);
    if (b < bounds.size() && std::abs(bounds[b] - t) <= tol) {
      merged.push_back(bounds[b++]);
    } else if (t <= total) {
      merged.push_back(t);
    }
  }
  while (b < bounds.size()) merged.push_back(bounds[b++]);
  std::vector<double> out;
  out.reserve(merged.size());
  for (double t : merged) {
    if (out.empty() || t > out.back()) out.push_back(std::min(t, total));
  }
  return out;
}

Trajectory integrate(const SegmentRhs& rhs, const Observer& observe, StateVector state0,
                     const PulseSequence& seq, const IntegratorConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = sample_grid(seq);
  const std::vector<double> bounds = seq.boundaries();
  Trajectory traj;
  traj.times.reserve(grid.size());
  traj.samples.reserve(grid.size());

  StateVector y = std::move(state0);
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < seq.segments.size(); ++k) {
    const Segment& seg = seq.segments[k];
    const double t0 = bounds[k];
    const double t1 = bounds[k + 1];
    // Samples owned by this segment: (t0, t1], plus t0 for the first one.
    const std::size_t begin = cursor;
    while (cursor < grid.size() && grid[cursor] <= t1) ++cursor;
    std::span<const double> local(grid.data() + begin, cursor - begin);
    OdeRhs bound = [&](double, std::span<const cplx> yy, std::span<cplx> dd) { rhs(seg, yy, dd); };
    traj.stats += solve_ode(bound, y, t0, t1, local, cfg, [&](double t, std::span<const cplx> yy) {
      traj.times.push_back(t);
      traj.samples.push_back(observe(t, yy));
    });
    traj.snapshots.push_back(Snapshot{t1, k, y});
  }
  return traj;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.size() < 2) {
    throw std::invalid_argument("Pchip: need at least two points of matching size");
  }
  const std::size_t n = x_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    if (!(h[i] > 0.0)) throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) {
      s = 0.0;
    } else if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double Pchip::operator()(double x) const {
  if (x < x_.front() || x > x_.back()) throw std::out_of_range("Pchip: x outside data span");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i >= x_.size() - 1) i = x_.size() - 2;
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  if (s == 0.0) return y_[i];
  if (s == 1.0) return y_[i + 1];
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

std::vector<Observables> resample(const Trajectory& traj, std::span<const double> times) {
  std::vector<Observables> out;
  if (times.empty()) return out;
  if (traj.times.size() < 2) throw std::out_of_range("resample: trajectory has fewer than 2 samples");
  for (double t : times) {
    if (t < traj.times.front() || t > traj.times.back()) {
      throw std::out_of_range("resample: time outside the trajectory span");
    }
  }
  using Field = double Observables::*;
  const Field fields[] = {&Observables::photon_rate, &Observables::intracavity_photons,
                          &Observables::mean_inversion, &Observables::collective_coherence,
                          &Observables::total_excitation};
  out.resize(times.size());
  for (Field f : fields) {
    const Pchip interp(traj.times, traj.channel(f));
    for (std::size_t i = 0; i < times.size(); ++i) out[i].*f = interp(times[i]);
  }
  return out;
}

}  // namespace ramsr
