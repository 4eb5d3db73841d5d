#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ramsr/cluster_grid.hpp"
#include "ramsr/observables.hpp"
#include "ramsr/params.hpp"
#include "ramsr/pulse_sequence.hpp"

namespace ramsr {

using cplx = std::complex<double>;
using StateVector = std::vector<cplx>;

/// Index map of the second-order cumulant state for M clusters.
///
///   [0] <a>   [1] <a a>   [2] <a^dag a>
///   per cluster c (5 blocks of M):   <s_c>=<sigma^-_c>, <p_c>=<sigma_ee_c>,
///                                    X_c=<a^dag s_c>, Y_c=<a s_c>, Z_c=<a p_c>
///   per unordered pair c <= d (packed upper triangle, 3 blocks):
///                                    C_cd=<s^dag_c s_d>, D_cd=<s_c s_d>, F_cd=<p_c p_d>
///   full M x M, row-major:           E_cd=<p_c s_d>
///
/// Pair quantities refer to two distinct atoms, one in c and one in d; the
/// diagonal c == d holds distinct atoms of the same cluster. C_dc is the
/// conjugate of the stored C_cd.
class StateLayout {
 public:
  explicit StateLayout(std::size_t n_clusters);

  std::size_t clusters() const { return m_; }
  std::size_t pairs() const { return pairs_; }
  std::size_t size() const { return size_; }

  static constexpr std::size_t alpha() { return 0; }
  static constexpr std::size_t aa() { return 1; }
  static constexpr std::size_t photons() { return 2; }
  std::size_t s(std::size_t c) const { return 3 + c; }
  std::size_t p(std::size_t c) const { return 3 + m_ + c; }
  std::size_t x(std::size_t c) const { return 3 + 2 * m_ + c; }
  std::size_t y(std::size_t c) const { return 3 + 3 * m_ + c; }
  std::size_t z(std::size_t c) const { return 3 + 4 * m_ + c; }
  /// Packed index of the unordered pair; requires c <= d.
  std::size_t pair(std::size_t c, std::size_t d) const {
    return c * m_ - c * (c - 1) / 2 + (d - c);
  }
  std::size_t c_pair(std::size_t c, std::size_t d) const { return c_base_ + pair(c, d); }
  std::size_t d_pair(std::size_t c, std::size_t d) const { return d_base_ + pair(c, d); }
  std::size_t f_pair(std::size_t c, std::size_t d) const { return f_base_ + pair(c, d); }
  std::size_t e(std::size_t c, std::size_t d) const { return e_base_ + c * m_ + d; }

  std::size_t c_base() const { return c_base_; }
  std::size_t d_base() const { return d_base_; }
  std::size_t f_base() const { return f_base_; }
  std::size_t e_base() const { return e_base_; }

 private:
  std::size_t m_;
  std::size_t pairs_;
  std::size_t c_base_;
  std::size_t d_base_;
  std::size_t f_base_;
  std::size_t e_base_;
  std::size_t size_;
};

/// Health of a cumulant state against its physical invariants.
struct StateHealth {
  double min_population = 0.0;
  double max_population = 0.0;
  double max_population_imag = 0.0;  ///< max |Im <sigma_ee_c>|
  double photon_imag = 0.0;          ///< |Im <a^dag a>|
  double photons = 0.0;
  bool finite = true;
};

/// Second-order cumulant equations of motion for the transversely driven
/// Tavis-Cummings model with cavity loss and atomic decay.
///
/// Rotating frame at the laser frequency:
///   H = -(delta_a - delta_cavity) a^dag a
///       + sum_j [ -(delta_a - delta_dopp_j) sigma_ee_j + g_j (a^dag s_j + a s^dag_j)
///                 + (Omega/2) e^{i phi} s^dag_j + h.c. ]
/// with jump operators sqrt(kappa) a and sqrt(gamma) s_j. Third-order moments
/// are factorized as <ABC> = <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>.
///
/// Owns scratch buffers, so one instance must not be shared between
/// concurrently running integrations.
class CumulantModel {
 public:
  CumulantModel(ClusterGrid grid, PhysicalParams params);

  const StateLayout& layout() const { return layout_; }
  const ClusterGrid& grid() const { return grid_; }
  const PhysicalParams& params() const { return params_; }

  /// All atoms in the ground state, cavity in vacuum.
  StateVector ground_state() const;
  /// Uncorrelated product state with every atom rotated by theta about the
  /// drive axis: <sigma_ee> = sin^2(theta/2), <sigma^-> = -i e^{i phase} sin(theta)/2.
  StateVector product_state(double theta, double drive_phase = 0.0) const;

  /// dy/dt for the drive/detuning of one segment.
  void rhs(const Segment& segment, std::span<const cplx> y, std::span<cplx> dy) const;

  Observables observe(std::span<const cplx> y) const;
  StateHealth health(std::span<const cplx> y) const;

  /// Mean population of each cluster (real part of <sigma_ee_c>).
  std::vector<double> populations(std::span<const cplx> y) const;

 private:
  ClusterGrid grid_;
  PhysicalParams params_;
  StateLayout layout_;
  std::vector<double> g_;
  std::vector<double> n_;
  std::vector<double> w_;  // n_c g_c
  std::vector<double> doppler_;
  // scratch
  mutable std::vector<cplx> sum_c_;
  mutable std::vector<cplx> sum_d_;
  mutable std::vector<cplx> sum_e_;
};

}  // namespace ramsr
