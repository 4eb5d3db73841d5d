#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ramsr/experiments.hpp"

namespace ramsr {

/// Configuration file grammar (one statement per line):
///
///   # comment (also after a value)
///   key = value              keys before any section live at the root
///   [section]                following keys are section.key
///
/// Values are numbers with an optional unit suffix, bare words, quoted strings
/// or true/false. Dimensional keys accept
///   frequency:   Hz kHz MHz GHz        (ordinary frequency, converted to rad/s once)
///   time:        s ms us ns ps
///   rate:        /s 1/s
///   temperature: K mK uK nK
/// and a bare number means the base unit. Dimensionless keys reject suffixes.
/// Unknown keys, duplicate keys and malformed values are ConfigErrors carrying
/// the line number.
struct ParsedConfig {
  ExperimentConfig config;
  /// Every key (defaults included) in canonical text form, base units.
  std::map<std::string, std::string> values;
  /// Keys set by the file or an override.
  std::set<std::string> explicit_keys;

  /// Sorted, fully expanded configuration that parses back to the same values.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

/// Known keys with their default canonical values.
const std::map<std::string, std::string>& config_defaults();

ParsedConfig parse_config_text(std::string_view text);
ParsedConfig parse_config_file(const std::filesystem::path& path);
ParsedConfig default_config();

/// Applies "key=value" (same value syntax as the file) and revalidates.
void apply_override(ParsedConfig& parsed, std::string_view assignment);
void set_value(ParsedConfig& parsed, const std::string& key, std::string_view value);

/// Locale-independent decimal formatting with the given significant digits.
std::string format_number(double value, int significant = 9);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace ramsr
