#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ramsr/report.hpp"

using namespace ramsr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string header(const Table& t) { return t.to_csv().substr(0, t.to_csv().find('\n')); }

ParsedConfig small(const std::string& protocol) {
  auto pc = default_config();
  set_value(pc, "protocol", protocol);
  apply_override(pc, "grid.n_phase=4");
  apply_override(pc, "grid.n_doppler=1");
  apply_override(pc, "sequence.sample_dt=10 ns");
  return pc;
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("ramsr_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Results, TableSchemas) {
  EXPECT_EQ(header(threshold_table({})),
            "t_P_s,sin2_proxy,peak_rate_per_s,area_photons,delay_s,burst_flag");
  EXPECT_EQ(header(lineshape_table({})), "delta_a_hz,peak_rate_per_s,area_photons,burst_flag");
  EXPECT_EQ(header(trace_table({})),
            "t_s,photon_rate_per_s,intracavity_photons,mean_inversion,collective_coherence,"
            "total_excitation");
}

TEST(Results, CsvFormatting) {
  Table t{"x", {{"a", ColumnKind::real}, {"n", ColumnKind::integer}, {"f", ColumnKind::flag}}, {}};
  t.add_row({1.0 / 3.0, 7.0, 1.0});
  t.add_row({2.5e-7, -3.0, 0.0});
  EXPECT_EQ(t.to_csv(), "a,n,f\n0.333333333,7,1\n2.5e-07,-3,0\n");
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(Results, ManifestListsEveryFile) {
  const auto out = run_protocol(small("trace"));
  auto manifest = out.manifest;
  const auto dir = scratch_dir("manifest");
  emit_results(out.tables, manifest, dir);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j["protocol"], "trace");
  EXPECT_EQ(j["config_hash"], small("trace").hash());
  EXPECT_EQ(j["version"], software_version());
  EXPECT_EQ(j["config"].size(), config_defaults().size());
  std::size_t csv = 0;
  for (const auto& f : j["files"]) {
    EXPECT_TRUE(fs::exists(dir / f["name"].get<std::string>())) << f["name"];
    if (f["name"].get<std::string>().ends_with(".csv")) ++csv;
  }
  EXPECT_EQ(csv, out.tables.size());
  EXPECT_TRUE(j["integrator"]["accepted_steps"].get<int>() > 0);
  EXPECT_GT(j["summary"]["peak_rate_per_s"].get<double>(), 0.0);
  fs::remove_all(dir);
}

TEST(Results, RerunIsByteIdentical) {
  const auto pc = small("trace");
  const auto d1 = scratch_dir("rerun1"), d2 = scratch_dir("rerun2");
  auto a = run_protocol(pc);
  auto b = run_protocol(pc);
  emit_results(a.tables, a.manifest, d1);
  emit_results(b.tables, b.manifest, d2);
  EXPECT_EQ(slurp(d1 / "trace.csv"), slurp(d2 / "trace.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Results, EmitFailsOnUnwritableTarget) {
  const auto d = scratch_dir("blocked");
  std::ofstream(d.string()) << "file, not a directory";
  auto out = RunOutput{};
  EXPECT_THROW(emit_results({}, out.manifest, d), std::runtime_error);
  fs::remove(d);
}
