#pragma once

#include <cmath>
#include <numbers>

namespace ramsr {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
constexpr double rad_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

namespace constants {
inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kSr88Mass = 87.9056122571 * kAtomicMassUnit;
inline constexpr double kIntercombinationWavelength = 689.449e-9;  // m, 1S0 -> 3P1
inline constexpr double kNaturalDecayTime = 22e-6;                  // s, 3P1
}  // namespace constants

/// 1-sigma Doppler detuning (rad/s) of a thermal cloud probed along one axis.
double doppler_sigma_from_temperature(double temperature_kelvin,
                                      double wavelength_m = constants::kIntercombinationWavelength,
                                      double mass_kg = constants::kSr88Mass);

/// Physical rates of the cavity + ensemble system. All frequencies are
/// angular (rad/s).
struct PhysicalParams {
  double kappa = 0.0;    ///< cavity photon-number decay rate
  double gamma = 0.0;    ///< excited-state population decay rate
  double g_max = 0.0;    ///< single-atom vacuum coupling at an antinode
  double n_atoms = 1.0;  ///< total atom number
  double rabi = 0.0;     ///< transverse drive Rabi frequency
  double delta_a = 0.0;  ///< laser detuning omega_l - omega_a
  double delta_cavity = 0.0;  ///< cavity resonance minus atomic resonance
  double doppler_sigma = 0.0;
  double coupling_efficiency = 1.0;

  /// Sr-88 intercombination-line experiment: kappa = 2pi 780 kHz,
  /// g = 2pi 450 Hz, N = 2e7, Omega = 2pi 833 kHz, 22 us lifetime, 2 uK cloud.
  static PhysicalParams strontium_defaults();

  /// Throws std::invalid_argument on a violated invariant. allow_lossless
  /// admits kappa == 0 (closed-system checks of the equations of motion).
  void validate(bool allow_lossless = false) const;

  double g_eff() const { return g_max * coupling_efficiency; }
  /// 2 g_eff sqrt(N), the collective vacuum Rabi frequency at an antinode.
  double collective_rabi() const { return 2.0 * g_eff() * std::sqrt(n_atoms); }
  bool oscillatory_regime() const { return collective_rabi() > kappa; }
  /// 4 g^2 / (kappa gamma) at an antinode; infinite when gamma = 0.
  double single_atom_cooperativity() const;
};

}  // namespace ramsr
