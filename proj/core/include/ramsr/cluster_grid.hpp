#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ramsr/params.hpp"

namespace ramsr {

/// Group of atoms sharing one coupling and one Doppler detuning.
struct Cluster {
  double g = 0.0;              ///< signed coupling, g_max cos(phi) coupling_efficiency (rad/s)
  double delta_doppler = 0.0;  ///< static Doppler shift of the atomic resonance (rad/s)
  double multiplicity = 0.0;   ///< number of atoms represented (real-valued)
};

/// Deterministic (standing-wave phase x Doppler) discretization of the
/// ensemble. Clusters are stored phase-major: index = i_phase * n_doppler + i_doppler.
struct ClusterGrid {
  std::vector<Cluster> clusters;
  int n_phase = 0;
  int n_doppler = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return clusters.size(); }
  double total_multiplicity() const;
  /// Multiplicity-weighted mean of (g_c / g_ref)^2.
  double mean_squared_coupling(double g_ref) const;
};

/// Midpoint phase nodes on [0, pi] (covers both coupling signs explicitly)
/// times a Gauss-Hermite quadrature of the Doppler Gaussian.
///
/// n_phase == 1 has no meaningful midpoint (cos(pi/2) = 0), so it falls back to
/// a single cluster at the RMS coupling g_max/sqrt(2) and records a warning.
/// doppler_sigma == 0 collapses the Doppler axis to one node (also a warning
/// when n_doppler > 1).
ClusterGrid build_cluster_grid(const PhysicalParams& params, int n_phase, int n_doppler);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule for a unit-variance normal density
/// (weights sum to 1), via Golub-Welsch.
QuadratureRule gauss_hermite_normal(int n);

}  // namespace ramsr
