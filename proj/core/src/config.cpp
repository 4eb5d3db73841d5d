#include "ramsr/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <utility>

#include "ramsr/error.hpp"

namespace ramsr {

namespace {

enum class Kind {
  frequency,
  time,
  rate,
  temperature,
  real,
  integer,
  boolean,
  choice,
  frequency_or_auto,
  time_or_auto,
  real_or_auto,
};

struct KeySpec {
  Kind kind;
  std::string def;
  std::vector<std::string> choices{};
};

const std::map<std::string, KeySpec>& registry() {
  static const std::map<std::string, KeySpec> keys = {
      {"protocol", {Kind::choice, "trace",
                    {"trace", "threshold-scan", "lineshape", "lock", "recycle", "oracle-check"}}},
      {"rng_seed", {Kind::integer, "1"}},
      {"threads", {Kind::integer, "0"}},

      {"physics.kappa", {Kind::frequency, "780000 Hz"}},
      {"physics.g", {Kind::frequency, "450 Hz"}},
      {"physics.n_atoms", {Kind::real, "20000000"}},
      {"physics.rabi", {Kind::frequency, "833000 Hz"}},
      {"physics.delta_a", {Kind::frequency, "0 Hz"}},
      {"physics.delta_cavity", {Kind::frequency, "0 Hz"}},
      {"physics.decay_rate", {Kind::rate, "45454.545454545456"}},
      {"physics.temperature", {Kind::temperature, "2e-06 K"}},
      {"physics.doppler_sigma", {Kind::frequency_or_auto, "auto"}},
      {"physics.coupling_efficiency", {Kind::real, "1"}},

      {"grid.n_phase", {Kind::integer, "16"}},
      {"grid.n_doppler", {Kind::integer, "3"}},

      {"integrator.method", {Kind::choice, "dp45", {"dp45", "rk4"}}},
      {"integrator.rel_tol", {Kind::real, "1e-08"}},
      {"integrator.abs_tol", {Kind::real, "1e-10"}},
      {"integrator.max_step", {Kind::time, "1e-07 s"}},
      {"integrator.initial_step", {Kind::time, "0 s"}},

      {"sequence.sample_dt", {Kind::time, "2e-09 s"}},
      {"sequence.readout", {Kind::time, "1e-05 s"}},
      {"sequence.floor_fraction", {Kind::real, "0.01"}},
      {"sequence.trace", {Kind::choice, "pulse", {"pulse", "ramsey"}}},
      {"sequence.pulse_area", {Kind::real, "1"}},
      {"sequence.tau_p", {Kind::time, "3e-07 s"}},
      {"sequence.free_time", {Kind::time, "5e-06 s"}},

      {"threshold.min", {Kind::real, "0.1"}},
      {"threshold.max", {Kind::real, "1.1"}},
      {"threshold.points", {Kind::integer, "21"}},
      {"threshold.metric", {Kind::choice, "area", {"area", "peak"}}},

      {"lineshape.span", {Kind::frequency, "2200000 Hz"}},
      {"lineshape.step", {Kind::frequency, "10000 Hz"}},
      {"lineshape.fine_span", {Kind::frequency, "300000 Hz"}},
      {"lineshape.fine_step", {Kind::frequency, "2500 Hz"}},

      {"lock.step_frr", {Kind::real, "0.1"}},
      {"lock.gain", {Kind::real, "0.5"}},
      {"lock.iterations", {Kind::integer, "108"}},
      {"lock.cycles", {Kind::integer, "1"}},
      {"lock.initial_offset", {Kind::frequency, "0 Hz"}},
      {"lock.laser_noise", {Kind::frequency, "0 Hz"}},
      {"lock.drift_per_sequence", {Kind::frequency, "0 Hz"}},
      {"lock.table_resolution", {Kind::frequency, "2000 Hz"}},
      {"lock.peak_source", {Kind::choice, "table", {"table", "simulate"}}},
      {"lock.apply_loss", {Kind::boolean, "false"}},

      {"loss.mode", {Kind::choice, "pulsed-ramsey", {"pulsed-ramsey", "no-pulses", "mot-continuous"}}},
      {"loss.tau", {Kind::time_or_auto, "auto"}},
      {"loss.survival", {Kind::real_or_auto, "auto"}},
      {"loss.cycle_time", {Kind::time, "0.002 s"}},
      {"loss.sequences", {Kind::integer, "100"}},
      {"loss.min_atoms", {Kind::real, "1000"}},
      {"loss.peak_source", {Kind::choice, "table", {"table", "simulate"}}},
  };
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Unit {
  const char* suffix;
  double scale;
};

const std::vector<Unit>& units_for(Kind k) {
  static const std::vector<Unit> freq = {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::vector<Unit> time = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"\xC2\xB5s", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
  static const std::vector<Unit> rate = {{"/s", 1.0}, {"1/s", 1.0}};
  static const std::vector<Unit> temp = {
      {"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"\xC2\xB5K", 1e-6}, {"nK", 1e-9}};
  static const std::vector<Unit> none;
  switch (k) {
    case Kind::frequency:
    case Kind::frequency_or_auto: return freq;
    case Kind::time:
    case Kind::time_or_auto: return time;
    case Kind::rate: return rate;
    case Kind::temperature: return temp;
    default: return none;
  }
}

const char* base_unit(Kind k) {
  switch (k) {
    case Kind::frequency:
    case Kind::frequency_or_auto: return "Hz";
    case Kind::time:
    case Kind::time_or_auto: return "s";
    case Kind::rate: return "/s";
    case Kind::temperature: return "K";
    default: return "";
  }
}

// Parses "<number>[ ]<suffix>" into base units.
double parse_quantity(std::string_view text, Kind kind, const std::string& key, int line) {
  text = trim(text);
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + std::string(text) + "'", line);
  }
  const std::string_view suffix = trim(std::string_view(res.ptr, static_cast<std::size_t>(last - res.ptr)));
  double scale = 1.0;
  if (!suffix.empty()) {
    const auto& units = units_for(kind);
    bool found = false;
    for (const auto& u : units) {
      if (suffix == u.suffix) {
        scale = u.scale;
        found = true;
        break;
      }
    }
    if (!found) {
      if (units.empty()) {
        throw ConfigError("key '" + key + "' is dimensionless; unit suffix '" + std::string(suffix) +
                              "' not allowed",
                          line);
      }
      std::string allowed;
      for (const auto& u : units) allowed += std::string(allowed.empty() ? "" : ", ") + u.suffix;
      throw ConfigError("key '" + key + "': unit suffix '" + std::string(suffix) +
                            "' is not one of " + allowed,
                        line);
    }
  }
  // divide by the exact reciprocal so that e.g. 300 ns is the double nearest 3e-7
  const double out = scale < 1.0 ? v / std::round(1.0 / scale) : v * scale;
  if (!std::isfinite(out)) throw ConfigError("key '" + key + "': value must be finite", line);
  return out;
}

std::string normalize(const std::string& key, const KeySpec& spec, std::string_view raw, int line) {
  std::string_view text = trim(raw);
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front()) {
    text = text.substr(1, text.size() - 2);
  }
  if (text.empty()) throw ConfigError("key '" + key + "': empty value", line);
  switch (spec.kind) {
    case Kind::choice: {
      for (const auto& c : spec.choices) {
        if (text == c) return c;
      }
      std::string allowed;
      for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
      throw ConfigError("key '" + key + "': '" + std::string(text) + "' is not one of " + allowed, line);
    }
    case Kind::boolean:
      if (text == "true" || text == "yes" || text == "on" || text == "1") return "true";
      if (text == "false" || text == "no" || text == "off" || text == "0") return "false";
      throw ConfigError("key '" + key + "': expected true or false", line);
    case Kind::integer: {
      long long v = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + std::string(text) + "'", line);
      }
      return std::to_string(v);
    }
    case Kind::frequency_or_auto:
    case Kind::time_or_auto:
    case Kind::real_or_auto:
      if (text == "auto") return "auto";
      [[fallthrough]];
    default: {
      const double v = parse_quantity(text, spec.kind, key, line);
      const std::string unit = base_unit(spec.kind);
      return unit.empty() ? shortest(v) : shortest(v) + " " + unit;
    }
  }
}

double number_of(const std::map<std::string, std::string>& values, const std::string& key) {
  const std::string& s = values.at(key);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

long long integer_of(const std::map<std::string, std::string>& values, const std::string& key) {
  return std::stoll(values.at(key));
}

int int_of(const std::map<std::string, std::string>& values, const std::string& key) {
  const long long v = integer_of(values, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + key + "': integer out of range");
  }
  return static_cast<int>(v);
}

ExperimentConfig build(const std::map<std::string, std::string>& v) {
  ExperimentConfig c;
  const std::string& proto = v.at("protocol");
  if (proto == "trace") c.protocol = Protocol::trace;
  else if (proto == "threshold-scan") c.protocol = Protocol::threshold_scan;
  else if (proto == "lineshape") c.protocol = Protocol::lineshape;
  else if (proto == "lock") c.protocol = Protocol::lock;
  else if (proto == "recycle") c.protocol = Protocol::recycle;
  else c.protocol = Protocol::oracle_check;
  const long long seed = integer_of(v, "rng_seed");
  if (seed < 0) throw ConfigError("key 'rng_seed' must be non-negative");
  c.rng_seed = static_cast<std::uint64_t>(seed);
  c.threads = int_of(v, "threads");

  PhysicalParams& p = c.params;
  p.kappa = hz_to_rad(number_of(v, "physics.kappa"));
  p.g_max = hz_to_rad(number_of(v, "physics.g"));
  p.n_atoms = number_of(v, "physics.n_atoms");
  p.rabi = hz_to_rad(number_of(v, "physics.rabi"));
  p.delta_a = hz_to_rad(number_of(v, "physics.delta_a"));
  p.delta_cavity = hz_to_rad(number_of(v, "physics.delta_cavity"));
  p.gamma = number_of(v, "physics.decay_rate");
  if (v.at("physics.doppler_sigma") == "auto") {
    const double t = number_of(v, "physics.temperature");
    if (t < 0.0) throw ConfigError("key 'physics.temperature' must be non-negative");
    p.doppler_sigma = doppler_sigma_from_temperature(t);
  } else {
    p.doppler_sigma = hz_to_rad(number_of(v, "physics.doppler_sigma"));
  }
  p.coupling_efficiency = number_of(v, "physics.coupling_efficiency");

  c.n_phase = int_of(v, "grid.n_phase");
  c.n_doppler = int_of(v, "grid.n_doppler");

  c.integrator.method = v.at("integrator.method") == "rk4" ? Method::fixed_rk4 : Method::adaptive_dp45;
  c.integrator.rel_tol = number_of(v, "integrator.rel_tol");
  c.integrator.abs_tol = number_of(v, "integrator.abs_tol");
  c.integrator.max_step = number_of(v, "integrator.max_step");
  c.integrator.initial_step = number_of(v, "integrator.initial_step");

  c.sample_dt = number_of(v, "sequence.sample_dt");
  c.readout = number_of(v, "sequence.readout");
  c.floor_fraction = number_of(v, "sequence.floor_fraction");
  c.trace_sequence = v.at("sequence.trace") == "ramsey" ? TraceSequence::ramsey : TraceSequence::pulse;
  c.pulse_area = number_of(v, "sequence.pulse_area");
  c.tau_p = number_of(v, "sequence.tau_p");
  c.free_time = number_of(v, "sequence.free_time");

  c.scan_min = number_of(v, "threshold.min");
  c.scan_max = number_of(v, "threshold.max");
  c.scan_points = int_of(v, "threshold.points");
  c.threshold_metric = v.at("threshold.metric") == "peak" ? ThresholdMetric::peak_rate : ThresholdMetric::area;

  c.lineshape_span = number_of(v, "lineshape.span");
  c.lineshape_step = number_of(v, "lineshape.step");
  c.lineshape_fine_span = number_of(v, "lineshape.fine_span");
  c.lineshape_fine_step = number_of(v, "lineshape.fine_step");

  c.lock_step_frr = number_of(v, "lock.step_frr");
  c.lock_gain = number_of(v, "lock.gain");
  c.lock_iterations = int_of(v, "lock.iterations");
  c.lock_cycles = int_of(v, "lock.cycles");
  c.lock_initial_offset = number_of(v, "lock.initial_offset");
  c.laser_noise = number_of(v, "lock.laser_noise");
  c.drift_per_sequence = number_of(v, "lock.drift_per_sequence");
  c.lock_table_resolution = number_of(v, "lock.table_resolution");
  c.lock_peak_source = v.at("lock.peak_source") == "simulate" ? PeakSource::simulate : PeakSource::table;
  c.lock_apply_loss = v.at("lock.apply_loss") == "true";

  const std::string& mode = v.at("loss.mode");
  c.loss.mode = mode == "no-pulses"        ? LossMode::no_pulses
                : mode == "mot-continuous" ? LossMode::mot_continuous
                                           : LossMode::pulsed_ramsey;
  c.loss.tau_loss = v.at("loss.tau") == "auto" ? LossModel::default_tau(c.loss.mode)
                                               : number_of(v, "loss.tau");
  if (v.at("loss.survival") != "auto") c.loss.survival = number_of(v, "loss.survival");
  c.loss.cycle_time = number_of(v, "loss.cycle_time");
  c.recycle_sequences = int_of(v, "loss.sequences");
  c.min_atoms = number_of(v, "loss.min_atoms");
  c.recycle_peak_source = v.at("loss.peak_source") == "simulate" ? PeakSource::simulate : PeakSource::table;

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void rebuild(ParsedConfig& pc) { pc.config = build(pc.values); }

void assign(ParsedConfig& pc, const std::string& key, std::string_view raw, int line) {
  const auto& reg = registry();
  const auto it = reg.find(key);
  if (it == reg.end()) throw ConfigError("unknown key '" + key + "'", line);
  pc.values[key] = normalize(key, it->second, raw, line);
  pc.explicit_keys.insert(key);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote) {
      if (ch == quote) quote = 0;
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
    } else if (ch == '#' || ch == ';') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
  }
  return true;
}

}  // namespace

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = [] {
    std::map<std::string, std::string> d;
    for (const auto& [k, spec] : registry()) d[k] = normalize(k, spec, spec.def, 0);
    return d;
  }();
  return defaults;
}

ParsedConfig default_config() {
  ParsedConfig pc;
  pc.values = config_defaults();
  rebuild(pc);
  return pc;
}

ParsedConfig parse_config_text(std::string_view text) {
  ParsedConfig pc;
  pc.values = config_defaults();
  std::map<std::string, int> seen;
  std::set<std::string> sections_seen;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError("malformed section name", line_no);
      section = std::string(name);
      if (!sections_seen.insert(section).second) {
        throw ConfigError("duplicate section [" + section + "]", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string_view k = trim(line.substr(0, eq));
    if (!valid_name(k)) throw ConfigError("malformed key '" + std::string(k) + "'", line_no);
    const std::string key = section.empty() ? std::string(k) : section + "." + std::string(k);
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(prev->second) + ")",
                        line_no);
    }
    seen[key] = line_no;
    assign(pc, key, line.substr(eq + 1), line_no);
  }
  rebuild(pc);
  return pc;
}

ParsedConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void set_value(ParsedConfig& pc, const std::string& key, std::string_view value) {
  assign(pc, key, value, 0);
  rebuild(pc);
}

void apply_override(ParsedConfig& pc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set_value(pc, std::string(trim(assignment.substr(0, eq))), assignment.substr(eq + 1));
}

std::string ParsedConfig::canonical() const {
  std::string out;
  std::string current;
  // root keys first (they contain no dot), then sections in order
  for (const auto& [k, v] : values) {
    if (k.find('.') == std::string::npos) out += k + " = " + v + "\n";
  }
  for (const auto& [k, v] : values) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) continue;
    const std::string sec = k.substr(0, dot);
    if (sec != current) {
      out += "\n[" + sec + "]\n";
      current = sec;
    }
    out += k.substr(dot + 1) + " = " + v + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ParsedConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

std::string format_number(double v, int significant) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

}  // namespace ramsr
