#include "ramsr/results.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "ramsr/config.hpp"

#ifndef RAMSR_VERSION
#define RAMSR_VERSION "0.1.0"
#endif

namespace ramsr {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

const char* software_version() { return RAMSR_VERSION; }

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("Table '" + name + "': row has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c].name;
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      const double v = row[c];
      switch (columns[c].kind) {
        case ColumnKind::flag: out += v != 0.0 ? '1' : '0'; break;
        case ColumnKind::integer: out += std::to_string(static_cast<long long>(std::llround(v))); break;
        case ColumnKind::real: out += format_number(v, 9); break;
      }
    }
    out += '\n';
  }
  return out;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["software"] = software;
  j["version"] = version;
  j["protocol"] = protocol;
  j["config_hash"] = config_hash;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_values) cfg[k] = v;
  j["config"] = cfg;
  j["explicit_keys"] = explicit_keys;
  j["runtime_s"] = runtime_s;
  j["integrator"] = {{"accepted_steps", integrator.accepted},
                     {"rejected_steps", integrator.rejected},
                     {"rhs_evaluations", integrator.rhs_evals},
                     {"smallest_step_s", integrator.smallest_step}};
  j["warnings"] = warnings;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary) s[k] = number_or_null(v);
  j["summary"] = s;
  nlohmann::ordered_json n = nlohmann::ordered_json::object();
  for (const auto& [k, v] : notes) n[k] = v;
  j["notes"] = n;
  nlohmann::ordered_json files_json = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    files_json.push_back({{"name", f.name}, {"rows", f.rows}, {"columns", f.columns}});
  }
  j["files"] = files_json;
  return j.dump(2) + "\n";
}

void emit_results(const std::vector<Table>& tables, RunManifest& manifest,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
  manifest.files.clear();
  for (const auto& t : tables) {
    const std::string file = t.name + ".csv";
    write_file(out_dir / file, t.to_csv());
    OutputFile f;
    f.name = file;
    f.rows = t.rows.size();
    for (const auto& c : t.columns) f.columns.push_back(c.name);
    manifest.files.push_back(std::move(f));
  }
  manifest.files.push_back(OutputFile{"manifest.json", 0, {}});
  write_file(out_dir / "manifest.json", manifest.to_json());
}

}  // namespace ramsr
