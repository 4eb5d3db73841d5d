#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ramsr/oracle.hpp"
#include "ramsr/oracle_checks.hpp"

using namespace ramsr;

TEST(Oracle, SingleAtomDampedRabi) {
  const auto c = check_single_atom_damped_rabi();
  EXPECT_TRUE(c.passed) << c.measured;
}

TEST(Oracle, VacuumRabi) {
  const auto c = check_vacuum_rabi();
  EXPECT_TRUE(c.passed) << c.measured;
}

TEST(Oracle, AnalyticReferences) {
  // undamped limit and long-time steady state of the damped solution
  const double rabi = 3.0;
  EXPECT_NEAR(oracle::analytic::damped_rabi_excitation(rabi, 0.0, 0.7),
              oracle::analytic::rabi_excitation(rabi, 0.7), 1e-14);
  EXPECT_NEAR(oracle::analytic::rabi_excitation(rabi, std::numbers::pi / rabi), 1.0, 1e-15);
  const double gamma = 0.5;
  const double steady = rabi * rabi / 4 / (rabi * rabi / 2 + gamma * gamma / 4);
  EXPECT_NEAR(oracle::analytic::damped_rabi_excitation(rabi, gamma, 200.0), steady, 1e-12);
  const auto [pe, n] = oracle::analytic::vacuum_rabi(1.0, 0.0, 0.0, std::numbers::pi / 2);
  EXPECT_NEAR(pe, 0.0, 1e-14);
  EXPECT_NEAR(n, 1.0, 1e-14);
}

TEST(Oracle, StatesAreValidDensityMatrices) {
  oracle::OracleSystem sys;
  sys.params.kappa = 1.0;
  sys.params.g_max = 1.0;
  sys.atoms = {{1.0, 0.0}, {-0.5, 0.1}};
  sys.fock_cutoff = 3;
  sys.seq.segments = {Segment{1.0, 0.0, 0.0, 0.0, "free"}};
  const auto rho = oracle::product_state(sys, 2.0, 0.3);
  EXPECT_LT(oracle::trace_error(rho), 1e-14);
  EXPECT_LT(oracle::hermiticity_error(rho), 1e-14);
  EXPECT_GT(oracle::min_eigenvalue(rho), -1e-14);
  oracle::LiouvillianAction L(sys);
  EXPECT_NEAR(L.observe(rho).mean_inversion, std::pow(std::sin(1.0), 2), 1e-14);
}

TEST(Oracle, ConservationChecks) {
  for (const auto& c : check_conservation()) EXPECT_TRUE(c.passed) << c.name << " " << c.measured;
}

namespace {

oracle::OracleSystem two_level(int fock_cutoff) {
  oracle::OracleSystem sys;
  sys.params.kappa = 1.0;
  sys.params.g_max = 1.0;
  sys.fock_cutoff = fock_cutoff;
  return sys;
}

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-12;
  c.max_step = 0.01;
  return c;
}

std::vector<double> grid(double t_end, int n) {
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(t_end * i / n);
  return t;
}

double peak_rate(const oracle::OracleRun& r) {
  double p = 0.0;
  for (const auto& s : r.samples) p = std::max(p, s.obs.photon_rate);
  return p;
}

}  // namespace

TEST(Oracle, GroundStateIsStationary) {
  auto sys = two_level(2);
  sys.atoms = {{1.0, 0.2}, {-0.5, -0.1}};
  const Segment free{1.0, 0.0, 0.0, 0.3, "free"};
  sys.seq.segments = {free};
  oracle::LiouvillianAction L(sys);
  const auto rho = oracle::ground_state(sys);
  std::vector<std::complex<double>> r(rho.data(), rho.data() + rho.size()), dr(r.size());
  L.apply(free, r, dr);
  double worst = 0.0;
  for (const auto& v : dr) worst = std::max(worst, std::abs(v));
  EXPECT_EQ(worst, 0.0);
}

TEST(Oracle, UncoupledAtomDecaysExponentially) {
  auto sys = two_level(1);
  sys.params.gamma = 0.7;
  sys.atoms = {{0.0, 0.0}};
  sys.seq.segments = {Segment{5.0, 0.0, 0.0, 0.0, "free"}};
  const auto run = oracle::evolve_density(sys, oracle::product_state(sys, std::numbers::pi),
                                          grid(5.0, 50), tight());
  for (const auto& s : run.samples)
    EXPECT_NEAR(s.obs.mean_inversion, std::exp(-0.7 * s.t), 1e-9) << s.t;
}

TEST(Oracle, ResonantRabiFlopping) {
  auto sys = two_level(1);
  sys.params.kappa = 0.0;
  sys.params.rabi = 2.0;
  sys.atoms = {{0.0, 0.0}};
  sys.seq.segments = {Segment{6.0, 2.0, 0.0, 0.0, "drive"}};
  const auto run = oracle::evolve_density(sys, oracle::ground_state(sys), grid(6.0, 60), tight());
  for (const auto& s : run.samples)
    EXPECT_NEAR(s.obs.mean_inversion, std::pow(std::sin(s.t), 2), 1e-9) << s.t;
}

TEST(Oracle, TwoAtomSuperradiantEnhancement) {
  auto single = two_level(3);
  single.params.kappa = 4.0;
  single.atoms = {{1.0, 0.0}};
  single.seq.segments = {Segment{6.0, 0.0, 0.0, 0.0, "free"}};
  auto pair = single;
  pair.atoms = {{1.0, 0.0}, {1.0, 0.0}};
  const auto times = grid(6.0, 600);
  const double p1 = peak_rate(
      oracle::evolve_density(single, oracle::product_state(single, std::numbers::pi), times, tight()));
  const double p2 = peak_rate(
      oracle::evolve_density(pair, oracle::product_state(pair, std::numbers::pi), times, tight()));
  EXPECT_GT(p2, 2.0 * p1);
}

TEST(Oracle, OppositeCouplingsGiveSubradiance) {
  auto same = two_level(2);
  same.params.kappa = 4.0;
  same.atoms = {{1.0, 0.0}, {1.0, 0.0}};
  same.seq.segments = {Segment{6.0, 0.0, 0.0, 0.0, "free"}};
  auto opposite = same;
  opposite.atoms = {{1.0, 0.0}, {-1.0, 0.0}};
  const std::vector<std::complex<double>> symmetric = {1.0, 1.0};
  const auto times = grid(6.0, 600);
  const double ps = peak_rate(oracle::evolve_density(
      same, oracle::single_excitation_state(same, symmetric), times, tight()));
  const double po = peak_rate(oracle::evolve_density(
      opposite, oracle::single_excitation_state(opposite, symmetric), times, tight()));
  EXPECT_LT(po, 1e-6 * ps);
}

TEST(Oracle, PurcellDecayInBadCavityLimit) {
  auto sys = two_level(2);
  sys.params.kappa = 200.0;
  sys.params.g_max = 2.0;
  sys.atoms = {{2.0, 0.0}};
  const double rate = 4.0 * 2.0 * 2.0 / 200.0;
  sys.seq.segments = {Segment{3.0 / rate, 0.0, 0.0, 0.0, "free"}};
  IntegratorConfig cfg = tight();
  cfg.max_step = 1e-3;
  const auto run = oracle::evolve_density(sys, oracle::product_state(sys, std::numbers::pi),
                                          grid(3.0 / rate, 30), cfg);
  for (const auto& s : run.samples) {
    if (s.t < 0.1 / rate) continue;
    EXPECT_NEAR(std::log(s.obs.mean_inversion) / s.t, -rate, 0.1 * rate) << s.t;
  }
}

TEST(Oracle, FockCutoffConverged) {
  // the N = 4 comparison system: raising the cutoff by 2 changes < 1%
  PhysicalParams p;
  p.kappa = 2 * std::numbers::pi * 780e3;
  p.n_atoms = 4.0;
  p.g_max = 2.5 * p.kappa / 4.0;
  p.gamma = 1.0 / 22e-6;
  p.rabi = 20.0 * p.g_max * 2.0;
  const double t_pulse = std::numbers::pi / p.rabi;
  auto peak_for = [&](int cutoff) {
    oracle::OracleSystem sys;
    sys.params = p;
    sys.atoms.assign(4, oracle::Atom{p.g_max, 0.0});
    sys.fock_cutoff = cutoff;
    sys.seq = PulseSequence::single_pulse(p.rabi, t_pulse, 1.5e-6, 0.0, 5e-9);
    IntegratorConfig cfg = tight();
    cfg.max_step = 1e-8;
    return peak_rate(oracle::evolve_density(sys, oracle::ground_state(sys), sample_grid(sys.seq), cfg));
  };
  const double a = peak_for(6), b = peak_for(8);
  EXPECT_LT(std::abs(a - b) / b, 0.01);
}
