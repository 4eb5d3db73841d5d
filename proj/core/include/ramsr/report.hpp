#pragma once

#include <string>
#include <vector>

#include "ramsr/config.hpp"
#include "ramsr/experiments.hpp"
#include "ramsr/oracle_checks.hpp"
#include "ramsr/results.hpp"

namespace ramsr {

Table trace_table(const Trajectory& traj);
Table threshold_table(const ThresholdScanResult& r);
Table lineshape_table(const LineshapeResult& r);
Table lineshape_reference_table(const LineshapeResult& r);
Table lock_iteration_table(const LockRecord& r);
Table lock_pair_table(const LockRecord& r);
Table lock_calibration_table(const LockRecord& r);
Table recycle_table(const RecycleResult& r);
Table oracle_table(const std::vector<OracleCheck>& checks);

/// Tables, manifest and a short human-readable report of one protocol run.
struct RunOutput {
  std::vector<Table> tables;
  RunManifest manifest;
  std::vector<std::string> report;
  bool checks_passed = true;  ///< false only when an oracle check fails
};

/// Runs parsed.config.protocol. ConfigError and NumericalError propagate.
RunOutput run_protocol(const ParsedConfig& parsed);

}  // namespace ramsr
