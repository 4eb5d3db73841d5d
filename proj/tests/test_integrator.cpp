#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "ramsr/error.hpp"
#include "ramsr/integrator.hpp"

using namespace ramsr;

namespace {

// y' = (i w - l) y, y(0) = 1
const std::complex<double> kRate(-0.3, 2.0);

double final_error(const IntegratorConfig& cfg, double t1) {
  StateVector y = {1.0};
  solve_ode([](double, auto v, auto dv) { dv[0] = kRate * v[0]; }, y, 0.0, t1, {}, cfg,
            [](double, auto) {});
  return std::abs(y[0] - std::exp(kRate * t1));
}

}  // namespace

TEST(Integrator, Rk4IsFourthOrder) {
  IntegratorConfig cfg;
  cfg.method = Method::fixed_rk4;
  cfg.max_step = 0.05;
  const double e1 = final_error(cfg, 4.0);
  cfg.max_step = 0.025;
  const double e2 = final_error(cfg, 4.0);
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.15);
}

TEST(Integrator, AdaptiveMeetsTolerance) {
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    IntegratorConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    cfg.max_step = 10.0;
    EXPECT_LT(final_error(cfg, 10.0), 200 * tol) << tol;
  }
}

TEST(Integrator, DenseOutputAtSampleTimes) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 1.0;
  std::vector<double> times;
  for (int i = 0; i <= 40; ++i) times.push_back(0.1 * i);
  StateVector y = {1.0};
  double worst = 0.0;
  std::size_t seen = 0;
  solve_ode([](double, auto v, auto dv) { dv[0] = kRate * v[0]; }, y, 0.0, 4.0, times, cfg,
            [&](double t, auto v) {
              worst = std::max(worst, std::abs(v[0] - std::exp(kRate * t)));
              ++seen;
            });
  EXPECT_EQ(seen, times.size());
  EXPECT_LT(worst, 1e-8);
}

TEST(Integrator, NonFiniteStateThrows) {
  IntegratorConfig cfg;
  StateVector y = {1.0};
  EXPECT_THROW(solve_ode([](double, auto, auto dv) { dv[0] = std::nan(""); }, y, 0.0, 1.0, {},
                         cfg, [](double, auto) {}),
               NumericalError);
}

TEST(SampleGrid, IncludesSegmentBoundaries) {
  PulseSequence seq;
  seq.sample_dt = 1e-7;
  seq.segments = {Segment{0.35e-6, 1.0, 0.0, 0.0, "a"}, Segment{1e-6, 0.0, 0.0, 0.0, "b"}};
  const auto t = sample_grid(seq);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_DOUBLE_EQ(t.back(), 1.35e-6);
  EXPECT_NE(std::find(t.begin(), t.end(), 0.35e-6), t.end());
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(t[i - 1], t[i]);
}

TEST(Pchip, InterpolatesNodesAndKeepsMonotonicity) {
  const std::vector<double> x = {0, 1, 2, 3, 4}, y = {0, 0, 1, 1, 5};
  const Pchip p(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(p(x[i]), y[i]);
  double prev = p(0.0);
  for (double t = 0.01; t <= 4.0; t += 0.01) {
    const double v = p(t);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  // flat data stays flat
  for (double t = 0.0; t <= 1.0; t += 0.1) EXPECT_EQ(p(t), 0.0);
}

TEST(Pchip, ReproducesLinearData) {
  const Pchip p({0, 1, 3, 7}, {1, 3, 7, 15});
  for (double t = 0; t <= 7; t += 0.25) EXPECT_NEAR(p(t), 1 + 2 * t, 1e-12);
}
