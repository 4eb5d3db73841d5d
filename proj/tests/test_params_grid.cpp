#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ramsr/cluster_grid.hpp"
#include "ramsr/params.hpp"

using namespace ramsr;

TEST(Params, StrontiumDefaults) {
  const auto p = PhysicalParams::strontium_defaults();
  EXPECT_DOUBLE_EQ(p.kappa, 2 * std::numbers::pi * 780e3);
  EXPECT_DOUBLE_EQ(p.g_max, 2 * std::numbers::pi * 450.0);
  EXPECT_DOUBLE_EQ(p.rabi, 2 * std::numbers::pi * 833e3);
  EXPECT_DOUBLE_EQ(p.n_atoms, 2e7);
  EXPECT_NEAR(p.gamma, 1.0 / 22e-6, 1e-9);
  EXPECT_TRUE(p.oscillatory_regime());
}

TEST(Params, DopplerWidthOfTwoMicrokelvinCloud) {
  // sigma_v = sqrt(kB T / m), sigma_omega = k sigma_v
  const double m = 87.9056122571 * 1.66053906660e-27;
  const double sigma_v = std::sqrt(1.380649e-23 * 2e-6 / m);
  const double expected = 2 * std::numbers::pi / 689.449e-9 * sigma_v;
  EXPECT_NEAR(doppler_sigma_from_temperature(2e-6), expected, 1e-9 * expected);
  EXPECT_NEAR(rad_to_hz(expected), 19.95e3, 0.05e3);
}

TEST(Params, RejectsInvalid) {
  auto p = PhysicalParams::strontium_defaults();
  p.kappa = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.kappa = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_NO_THROW(p.validate(true));
  p = PhysicalParams::strontium_defaults();
  p.n_atoms = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PhysicalParams::strontium_defaults();
  p.doppler_sigma = 0.0;
  EXPECT_NO_THROW(p.validate());
}

TEST(ClusterGrid, StandingWaveAverageAndMultiplicity) {
  auto p = PhysicalParams::strontium_defaults();
  for (int n_phase : {2, 3, 8, 16, 64}) {
    const auto grid = build_cluster_grid(p, n_phase, 3);
    EXPECT_EQ(grid.size(), static_cast<std::size_t>(n_phase * 3));
    EXPECT_NEAR(grid.total_multiplicity(), p.n_atoms, 1e-6);
    // midpoint rule is exact for cos^2 on a uniform phase grid
    EXPECT_NEAR(grid.mean_squared_coupling(p.g_max), 0.5, 1e-12) << n_phase;
  }
}

TEST(ClusterGrid, CoversBothCouplingSigns) {
  const auto grid = build_cluster_grid(PhysicalParams::strontium_defaults(), 4, 1);
  int pos = 0, neg = 0;
  for (const auto& c : grid.clusters) (c.g > 0 ? pos : neg)++;
  EXPECT_EQ(pos, 2);
  EXPECT_EQ(neg, 2);
}

TEST(ClusterGrid, DegenerateCasesWarn) {
  auto p = PhysicalParams::strontium_defaults();
  const auto one = build_cluster_grid(p, 1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one.clusters[0].g, p.g_max / std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(one.warnings.empty());
  p.doppler_sigma = 0.0;
  const auto cold = build_cluster_grid(p, 4, 5);
  EXPECT_EQ(cold.size(), 4u);
  EXPECT_FALSE(cold.warnings.empty());
}

TEST(GaussHermite, NormalMoments) {
  for (int n : {1, 2, 3, 5, 8}) {
    const auto q = gauss_hermite_normal(n);
    double m0 = 0, m1 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double x = q.nodes[i], w = q.weights[i];
      m0 += w;
      m1 += w * x;
      m2 += w * x * x;
      m4 += w * x * x * x * x;
    }
    EXPECT_NEAR(m0, 1.0, 1e-13);
    EXPECT_NEAR(m1, 0.0, 1e-13);
    if (n >= 2) EXPECT_NEAR(m2, 1.0, 1e-12);
    if (n >= 3) EXPECT_NEAR(m4, 3.0, 1e-11);
  }
}
