#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ramsr/config.hpp"
#include "ramsr/error.hpp"
#include "ramsr/report.hpp"

namespace {

enum Exit { ok = 0, usage = 1, config_error = 2, numerical_error = 3, check_failed = 4 };

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  int threads = -1;
  std::string seed;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "configuration file (defaults apply when omitted)");
  sub->add_option("--out", o.out, "output directory (default: ramsr-out/<subcommand>)");
  sub->add_option("--set", o.overrides, "override one key, e.g. --set physics.n_atoms=1e6")
      ->take_all()
      ->allow_extra_args(false);
  sub->add_option("--threads", o.threads, "worker threads for scans (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "random seed (u64)");
}

int run(const std::string& name, const Options& o) {
  ramsr::ParsedConfig parsed =
      o.config.empty() ? ramsr::default_config() : ramsr::parse_config_file(o.config);
  ramsr::set_value(parsed, "protocol", name);
  for (const auto& s : o.overrides) ramsr::apply_override(parsed, s);
  if (o.threads >= 0) ramsr::set_value(parsed, "threads", std::to_string(o.threads));
  if (!o.seed.empty()) ramsr::set_value(parsed, "rng_seed", o.seed);

  ramsr::RunOutput result = ramsr::run_protocol(parsed);
  const std::filesystem::path dir =
      o.out.empty() ? std::filesystem::path("ramsr-out") / name : std::filesystem::path(o.out);
  ramsr::emit_results(result.tables, result.manifest, dir);

  for (const auto& line : result.report) std::cout << line << '\n';
  for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "config " << result.manifest.config_hash << ", " << result.manifest.runtime_s
            << " s, results in " << dir.string() << '\n';
  return result.checks_passed ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superradiant Ramsey spectroscopy simulator"};
  app.set_version_flag("--version", ramsr::software_version());
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"trace", "single pulse or Ramsey sequence, full time series"},
      {"threshold-scan", "burst metrics versus pump pulse length"},
      {"lineshape", "superradiant Ramsey lineshape versus laser detuning"},
      {"lock", "frequency lock driven by the frequency locator"},
      {"recycle", "atom number and peak series under atom recycling"},
      {"oracle-check", "cumulant model against exact master-equation references"}};

  Options opts;
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return usage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run(name, opts);
  } catch (const ramsr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const ramsr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
}
