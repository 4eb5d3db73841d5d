#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ramsr/integrator.hpp"

namespace ramsr {

enum class ColumnKind { real, integer, flag };

struct Column {
  std::string name;  ///< carries the unit as a suffix, e.g. delay_s
  ColumnKind kind = ColumnKind::real;
};

/// One comma-separated result file.
struct Table {
  std::string name;  ///< file stem
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  /// Header line plus one line per row; reals with 9 significant digits.
  std::string to_csv() const;
};

struct OutputFile {
  std::string name;
  std::size_t rows = 0;
  std::vector<std::string> columns;
};

struct RunManifest {
  std::string software = "ramsr";
  std::string version;
  std::string protocol;
  std::string config_hash;
  std::string config_canonical;
  std::vector<std::pair<std::string, std::string>> config_values;  ///< defaults included
  std::vector<std::string> explicit_keys;
  double runtime_s = 0.0;
  IntegratorStats integrator;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<OutputFile> files;

  std::string to_json() const;
};

/// Writes every table as <name>.csv and then manifest.json into out_dir
/// (created if needed), recording the files in the manifest. Throws
/// std::runtime_error on I/O failure.
void emit_results(const std::vector<Table>& tables, RunManifest& manifest,
                  const std::filesystem::path& out_dir);

/// Software version string of this build.
const char* software_version();

}  // namespace ramsr
