#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ramsr/config.hpp"
#include "ramsr/error.hpp"

using namespace ramsr;

TEST(Config, MinimalConfigFillsDefaults) {
  const auto pc = parse_config_text("protocol = \"trace\"\n");
  const auto& c = pc.config;
  EXPECT_EQ(c.protocol, Protocol::trace);
  EXPECT_DOUBLE_EQ(c.params.kappa, kTwoPi * 780e3);
  EXPECT_DOUBLE_EQ(c.params.g_max, kTwoPi * 450.0);
  EXPECT_DOUBLE_EQ(c.params.rabi, kTwoPi * 833e3);
  EXPECT_DOUBLE_EQ(c.params.n_atoms, 2e7);
  EXPECT_DOUBLE_EQ(c.tau_p, 300e-9);
  EXPECT_DOUBLE_EQ(c.free_time, 5e-6);
  EXPECT_NEAR(rad_to_hz(c.params.doppler_sigma), 19.95e3, 50.0);
  EXPECT_EQ(pc.explicit_keys.size(), 1u);
  EXPECT_EQ(pc.values.size(), config_defaults().size());
}

TEST(Config, UnitsConvertOnce) {
  const auto pc = parse_config_text(
      "[physics]\nkappa = 0.78 MHz\ng = 450Hz\ndecay_rate = 1e4 /s\ntemperature = 2 uK\n"
      "[sequence]\ntau_p = 300 ns\nfree_time = 5 us\nreadout = 0.012 ms\n");
  const auto& c = pc.config;
  EXPECT_DOUBLE_EQ(c.params.kappa, kTwoPi * 780e3);
  EXPECT_DOUBLE_EQ(c.params.g_max, kTwoPi * 450.0);
  EXPECT_DOUBLE_EQ(c.params.gamma, 1e4);
  EXPECT_DOUBLE_EQ(c.tau_p, 300e-9);
  EXPECT_DOUBLE_EQ(c.free_time, 5e-6);
  EXPECT_DOUBLE_EQ(c.readout, 12e-6);
  EXPECT_DOUBLE_EQ(c.params.doppler_sigma, doppler_sigma_from_temperature(2e-6));
}

TEST(Config, DopplerSigmaZeroAccepted) {
  const auto pc = parse_config_text("[physics]\ndoppler_sigma = 0\n");
  EXPECT_EQ(pc.config.params.doppler_sigma, 0.0);
}

TEST(Config, Errors) {
  auto line_of = [](const char* text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[physics]\nkappa = 1 MHz\n\nkappa = 2 MHz\n"), 4);
  EXPECT_EQ(line_of("[physics]\nbogus = 1\n"), 2);
  EXPECT_EQ(line_of("[physics]\nkappa = 1 us\n"), 2);        // wrong dimension
  EXPECT_EQ(line_of("[physics]\nn_atoms = 1e7 Hz\n"), 2);   // suffix on a pure number
  EXPECT_EQ(line_of("[grid]\nn_phase = 2.5\n"), 2);
  EXPECT_EQ(line_of("protocol = bake\n"), 1);
  EXPECT_EQ(line_of("[physics\n"), 1);
  EXPECT_EQ(line_of("just text\n"), 1);
  EXPECT_THROW(parse_config_text("[sequence]\nreadout = 1 ns\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[physics]\nkappa = -780 kHz\n"), ConfigError);
}

TEST(Config, DuplicateKeyNamesBothLines) {
  try {
    parse_config_text("[physics]\nkappa = 1 MHz\ng = 1 kHz\nkappa = 2 MHz\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, CanonicalRoundTripAndStableHash) {
  const auto a = parse_config_text(
      "protocol = lineshape\n[physics]\nkappa = 780 kHz\nn_atoms = 1e7\n[lock]\ngain = 0.3\n");
  const auto b = parse_config_text(
      "protocol = lineshape ; comment\n[lock]\ngain = 0.3 # comment\n[physics]\n"
      "n_atoms = 10000000\nkappa = 780000\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);

  const auto c = parse_config_text(a.canonical());
  EXPECT_EQ(c.canonical(), a.canonical());
  EXPECT_EQ(c.config.params.kappa, a.config.params.kappa);
  EXPECT_EQ(c.config.lock_gain, 0.3);
  EXPECT_NE(a.hash(), default_config().hash());
}

TEST(Config, Overrides) {
  auto pc = default_config();
  apply_override(pc, "physics.n_atoms=1e6");
  apply_override(pc, "sequence.tau_p = 250 ns");
  EXPECT_EQ(pc.config.params.n_atoms, 1e6);
  EXPECT_DOUBLE_EQ(pc.config.tau_p, 250e-9);
  EXPECT_TRUE(pc.explicit_keys.count("physics.n_atoms"));
  EXPECT_THROW(apply_override(pc, "physics.nope=1"), ConfigError);
  EXPECT_THROW(apply_override(pc, "physics.kappa"), ConfigError);
}

TEST(Config, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(4.0170123456e13), "4.01701235e+13");
  EXPECT_EQ(format_number(-2.5e-7), "-2.5e-07");
}

TEST(Config, ShippedExamplesParse) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(RAMSR_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(parse_config_file(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}
