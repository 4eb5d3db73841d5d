#include "ramsr/params.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace ramsr {

double doppler_sigma_from_temperature(double temperature_kelvin, double wavelength_m,
                                      double mass_kg) {
  if (temperature_kelvin < 0.0 || wavelength_m <= 0.0 || mass_kg <= 0.0) {
    throw std::invalid_argument("doppler_sigma_from_temperature: non-physical input");
  }
  const double v_rms = std::sqrt(constants::kBoltzmann * temperature_kelvin / mass_kg);
  return kTwoPi * v_rms / wavelength_m;
}

PhysicalParams PhysicalParams::strontium_defaults() {
  PhysicalParams p;
  p.kappa = hz_to_rad(780e3);
  p.gamma = 1.0 / constants::kNaturalDecayTime;
  p.g_max = hz_to_rad(450.0);
  p.n_atoms = 2e7;
  p.rabi = hz_to_rad(833e3);
  p.delta_a = 0.0;
  p.delta_cavity = 0.0;
  p.doppler_sigma = doppler_sigma_from_temperature(2e-6);
  p.coupling_efficiency = 1.0;
  return p;
}

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("PhysicalParams: ") + what);
}
}  // namespace

void PhysicalParams::validate(bool allow_lossless) const {
  require(std::isfinite(kappa) && (kappa > 0.0 || (allow_lossless && kappa == 0.0)),
          "kappa must be > 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
  require(std::isfinite(g_max) && g_max >= 0.0, "g_max must be >= 0");
  require(std::isfinite(n_atoms) && n_atoms >= 1.0, "n_atoms must be >= 1");
  require(std::isfinite(rabi) && rabi >= 0.0, "rabi must be >= 0");
  require(std::isfinite(delta_a), "delta_a must be finite");
  require(std::isfinite(delta_cavity), "delta_cavity must be finite");
  require(std::isfinite(doppler_sigma) && doppler_sigma >= 0.0, "doppler_sigma must be >= 0");
  require(coupling_efficiency > 0.0 && coupling_efficiency <= 1.0,
          "coupling_efficiency must be in (0, 1]");
}

double PhysicalParams::single_atom_cooperativity() const {
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  return 4.0 * g_eff() * g_eff() / (kappa * gamma);
}

}  // namespace ramsr
