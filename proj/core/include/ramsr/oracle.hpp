#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "ramsr/integrator.hpp"
#include "ramsr/observables.hpp"
#include "ramsr/params.hpp"
#include "ramsr/pulse_sequence.hpp"

namespace ramsr::oracle {

using DensityOperator = Eigen::MatrixXcd;
using SparseOp = Eigen::SparseMatrix<std::complex<double>>;

inline constexpr std::size_t kMaxAtoms = 4;
inline constexpr std::size_t kMaxDimension = 512;

struct Atom {
  double g = 0.0;              ///< signed coupling, rad/s
  double delta_doppler = 0.0;  ///< resonance shift, rad/s
};

/// Few-atom system for exact master-equation evolution. Basis ordering is
/// photon-number major, atom bits minor: index = n * 2^N + bits, with bit j
/// set when atom j is excited. params.g_max only normalizes
/// collective_coherence; params.n_atoms and doppler_sigma are ignored.
struct OracleSystem {
  PhysicalParams params;
  std::vector<Atom> atoms;
  int fock_cutoff = 4;
  PulseSequence seq;

  std::size_t atom_states() const { return std::size_t{1} << atoms.size(); }
  std::size_t dimension() const {
    return static_cast<std::size_t>(fock_cutoff + 1) * atom_states();
  }
  void validate() const;
};

/// Action rho -> L(t) rho of the Lindblad generator, applied without building
/// the superoperator. Effective Hamiltonians are cached per distinct segment drive.
class LiouvillianAction {
 public:
  explicit LiouvillianAction(const OracleSystem& sys);

  std::size_t dimension() const { return dim_; }
  void apply(const Segment& seg, std::span<const std::complex<double>> rho,
             std::span<std::complex<double>> drho) const;

  const SparseOp& annihilation() const { return a_; }
  const SparseOp& lowering(std::size_t j) const { return sm_[j]; }
  const SparseOp& excited(std::size_t j) const { return pe_[j]; }

  Observables observe(const DensityOperator& rho) const;

 private:
  const SparseOp& effective_hamiltonian(const Segment& seg) const;

  OracleSystem sys_;
  std::size_t dim_;
  SparseOp a_;
  SparseOp ada_;
  std::vector<SparseOp> sm_;
  std::vector<SparseOp> pe_;
  mutable std::map<std::tuple<double, double, double>, SparseOp> heff_cache_;
};

/// Vacuum with every atom in the ground state.
DensityOperator ground_state(const OracleSystem& sys);
/// Vacuum with every atom in cos(theta/2)|g> - i e^{i phase} sin(theta/2)|e>.
DensityOperator product_state(const OracleSystem& sys, double theta, double drive_phase = 0.0);
/// Vacuum with atom j in (|g> + sign_j |e>)/sqrt(2) style single-excitation
/// superposition: sum_j amplitudes_j |e_j>, normalized.
DensityOperator single_excitation_state(const OracleSystem& sys,
                                        std::span<const std::complex<double>> amplitudes);

double trace_error(const DensityOperator& rho);
double hermiticity_error(const DensityOperator& rho);
double min_eigenvalue(const DensityOperator& rho);

struct OracleSample {
  double t = 0.0;
  Observables obs;
};

struct OracleRun {
  std::vector<OracleSample> samples;
  DensityOperator final_state;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;  ///< smallest eigenvalue over spot checks
  IntegratorStats stats;
};

/// Evolves rho0 through sys.seq and records exact observables at the
/// requested (sorted, within the sequence) times. Throws NumericalError when
/// the trace drifts by more than 1e-6.
OracleRun evolve_density(const OracleSystem& sys, const DensityOperator& rho0,
                         std::span<const double> sample_times, const IntegratorConfig& cfg);

/// Closed-form single-atom references.
namespace analytic {
/// Resonant Rabi flopping without damping.
double rabi_excitation(double rabi, double t);
/// Resonantly driven atom with population decay gamma (coherence decay gamma/2),
/// starting in the ground state.
double damped_rabi_excitation(double rabi, double gamma, double t);
/// One excitation shared between an initially excited atom and an empty
/// resonant cavity: returns {excited population, intracavity photons}.
std::pair<double, double> vacuum_rabi(double g, double kappa, double gamma, double t);
}  // namespace analytic

}  // namespace ramsr::oracle
