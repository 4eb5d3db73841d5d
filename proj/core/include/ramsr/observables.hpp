#pragma once

namespace ramsr {

/// Scalar channels sampled along a trajectory.
struct Observables {
  double photon_rate = 0.0;          ///< kappa <a^dag a>, photons / s
  double intracavity_photons = 0.0;  ///< <a^dag a>
  double mean_inversion = 0.0;       ///< multiplicity-weighted mean of <sigma_ee>
  double collective_coherence = 0.0; ///< |sum_c n_c (g_c/g_max) <sigma^-_c>|
  double total_excitation = 0.0;     ///< <a^dag a> + sum_c n_c <sigma_ee_c>
};

}  // namespace ramsr
