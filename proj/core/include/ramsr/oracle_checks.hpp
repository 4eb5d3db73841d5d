#pragma once

#include <string>
#include <vector>

namespace ramsr {

struct OracleCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Single driven, decaying atom (no cavity coupling): exact density-matrix
/// evolution against the closed-form damped Rabi solution. Reports the
/// largest deviation relative to the largest excited population.
OracleCheck check_single_atom_damped_rabi();

/// Four identically coupled atoms with 2 g sqrt(N) / kappa = 2.5, pi pulse then
/// free emission: cumulant peak photon rate and peak time against the exact
/// master equation. Two checks (peak rate, peak time), relative deviations.
std::vector<OracleCheck> check_cumulant_four_atoms();

/// Closed system (kappa = gamma = 0) after the drive: drift of the total
/// excitation a^dag a + sum sigma_ee in the cumulant model and of the trace of
/// the exact density matrix, relative to the initial excitation.
std::vector<OracleCheck> check_conservation();

/// Exact one-atom vacuum Rabi oscillation against its 2x2 closed form.
OracleCheck check_vacuum_rabi();

/// All of the above.
std::vector<OracleCheck> run_oracle_suite();

}  // namespace ramsr
