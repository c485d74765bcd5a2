#pragma once

// Experiment configuration: a small key = value grammar with mandatory unit
// suffixes, or the same structure as a JSON object. Every physical value in a
// file carries its unit; silent unit mix-ups are the failure mode this layer
// exists to kill. Unknown keys and duplicate keys are hard errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvdnp/constants.hpp"
#include "nvdnp/errors.hpp"

namespace nvdnp {

inline constexpr const char* tool_version = "0.1.0";

enum class RunKind { spectrum, power_sweep, multitone, laser_model, estimate, thermometry };

inline const char* to_token(RunKind k) {
  switch (k) {
    case RunKind::spectrum: return "spectrum";
    case RunKind::power_sweep: return "power-sweep";
    case RunKind::multitone: return "multitone";
    case RunKind::laser_model: return "laser-model";
    case RunKind::estimate: return "estimate";
    case RunKind::thermometry: return "thermometry";
  }
  return "?";
}

inline std::optional<RunKind> run_kind_from_token(std::string_view s) {
  for (RunKind k : {RunKind::spectrum, RunKind::power_sweep, RunKind::multitone,
                    RunKind::laser_model, RunKind::estimate, RunKind::thermometry})
    if (s == to_token(k)) return k;
  return std::nullopt;
}

// ---- the config itself ----------------------------------------------------

struct SystemSection {
  double zero_field_splitting = nv_zfs_room;  // Hz
  double field = 17.6e-3;                     // T
  double temperature = 297.0;                 // K
  double n14_hyperfine = n14_hyperfine_zz;    // Hz, sign configurable
  double c13_hyperfine_zz = 0.02e6;           // Hz
  double c13_hyperfine_zx = 0.10e6;           // Hz
  bool include_n14 = true;                    // false: electron + 13C only
};

struct DissipatorSection {
  double optical_pump = 0.1e6;        // 1/s
  double electron_dephasing = 0.1e6;  // 1/s
  double electron_t1 = 1.0e3;         // 1/s
  double nuclear_t1 = 200.0;          // 1/s
};

struct DriveSection {
  double rabi = 0.05e6;         // Hz, per tone unless tone_rabis is given
  double frequency = 0.0;       // Hz; 0 lets the run pick the lower satellite
  double sweep_start = 2.362e9;
  double sweep_stop = 2.380e9;
  long sweep_points = 61;
  double rabi_start = 0.01e6;
  double rabi_stop = 2.0e6;
  long rabi_points = 25;
  double rabi_per_sqrt_watt = 110679.71798413355;  // 10 W -> 0.35 MHz
  std::vector<double> tones;        // Hz
  std::vector<double> tone_rabis;   // Hz, empty: rabi for every tone
  std::vector<double> tone_phases;  // rad, empty: all zero
  std::string strategy = "full";    // or "averaged"
};

struct ProtocolSection {
  std::string mode = "steady-state";  // or "evolve"
  double duration = 0.0;              // s, required for evolve
};

struct LaserSection {
  double alpha = 3.4;  // K per mW/mm2
  double beta = 1.0;
  double scale = 1.0;
  double base_temperature = 300.0;  // K
  double density_start = 1.0;       // mW/mm2
  double density_stop = 100.0;
  long density_points = 100;
};

struct EstimateSection {
  double signal_ratio = 217.7;  // hyper/thermal signal integral ratio
  double field_nmr = 6.0;       // T, where the thermal reference was taken
  double field_dnp = 17.6e-3;   // T, where the polarization was built
  double temperature_sample = 297.0;  // K
  double temperature_laser = 360.0;   // K
};

struct ThermometrySection {
  std::string input;  // CSV with (frequency_hz, contrast) rows
  double reference_splitting = nv_zfs_room;  // Hz
  double reference_temperature = 297.0;      // K
};

struct OutputSection {
  std::string directory;  // empty: current directory (CLI --out overrides)
  std::string prefix;     // empty: the run kind token
};

struct ExperimentConfig {
  std::optional<RunKind> kind;
  long seed = 0;
  long workers = 0;
  SystemSection system;
  DissipatorSection dissipator;
  DriveSection drive;
  ProtocolSection protocol;
  LaserSection laser;
  EstimateSection estimate;
  ThermometrySection thermometry;
  OutputSection output;
  // Keys the file did not set, as "section.key" in schema order.
  std::vector<std::string> defaulted;
};

// ---- value grammar ---------------------------------------------------------

namespace detail {

enum class Dim {
  frequency,    // Hz kHz MHz GHz (also used for rates, 1/s)
  field,        // T mT uT
  temperature,  // K
  time,         // s ms us
  intensity,    // mW/mm2
  heating,      // K/(mW/mm2)
  calibration,  // Hz/sqrt(W) kHz/sqrt(W) MHz/sqrt(W)
  angle,        // rad deg
  number,       // bare
  integer,      // bare
  boolean,      // true false
  text,
  frequency_list,
  angle_list,
};

struct UnitEntry {
  const char* suffix;
  double factor;
};

inline const std::vector<UnitEntry>& unit_table(Dim d) {
  static const std::vector<UnitEntry> freq = {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::vector<UnitEntry> field = {{"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}};
  static const std::vector<UnitEntry> temp = {{"K", 1.0}};
  static const std::vector<UnitEntry> time = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}};
  static const std::vector<UnitEntry> inten = {{"mW/mm2", 1.0}};
  static const std::vector<UnitEntry> heat = {{"K/(mW/mm2)", 1.0}};
  static const std::vector<UnitEntry> calib = {
      {"Hz/sqrt(W)", 1.0}, {"kHz/sqrt(W)", 1e3}, {"MHz/sqrt(W)", 1e6}};
  static const std::vector<UnitEntry> angle = {{"rad", 1.0}, {"deg", M_PI / 180.0}};
  static const std::vector<UnitEntry> none = {};
  switch (d) {
    case Dim::frequency:
    case Dim::frequency_list: return freq;
    case Dim::field: return field;
    case Dim::temperature: return temp;
    case Dim::time: return time;
    case Dim::intensity: return inten;
    case Dim::heating: return heat;
    case Dim::calibration: return calib;
    case Dim::angle:
    case Dim::angle_list: return angle;
    default: return none;
  }
}

inline std::string expected_units(Dim d) {
  std::string out;
  for (const UnitEntry& u : unit_table(d)) {
    if (!out.empty()) out += ", ";
    out += u.suffix;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_scalar(std::string_view text, Dim dim, const std::string& key, int line) {
  std::string_view t = trim(text);
  double mag = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), mag);
  if (ec != std::errc())
    throw ConfigError("cannot read a number from '" + std::string(t) + "' for '" + key + "'",
                      line);
  std::string_view suffix = trim(std::string_view(ptr, static_cast<size_t>(t.data() + t.size() - ptr)));
  const auto& units = unit_table(dim);
  if (units.empty()) {
    if (!suffix.empty())
      throw ConfigError("'" + key + "' is a bare number, got suffix '" + std::string(suffix) + "'",
                        line);
    return mag;
  }
  for (const UnitEntry& u : units)
    if (suffix == u.suffix) return mag * u.factor;
  if (suffix.empty())
    throw ConfigError("value for '" + key + "' needs a unit suffix (one of: " +
                          expected_units(dim) + ")",
                      line);
  throw ConfigError("'" + key + "' does not take unit '" + std::string(suffix) +
                        "' (expected one of: " + expected_units(dim) + ")",
                    line);
}

inline long parse_integer(std::string_view text, const std::string& key, int line) {
  std::string_view t = trim(text);
  long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || trim(std::string_view(ptr, static_cast<size_t>(t.data() + t.size() - ptr))).size() != 0)
    throw ConfigError("'" + key + "' takes an integer, got '" + std::string(t) + "'", line);
  return v;
}

inline bool parse_boolean(std::string_view text, const std::string& key, int line) {
  std::string_view t = trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError("'" + key + "' takes true or false, got '" + std::string(t) + "'", line);
}

inline std::vector<double> parse_list(std::string_view text, Dim dim, const std::string& key,
                                      int line) {
  std::vector<double> out;
  size_t start = 0;
  std::string s(text);
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    std::string_view item(s.data() + start,
                          (comma == std::string::npos ? s.size() : comma) - start);
    if (!trim(item).empty()) out.push_back(parse_scalar(item, dim, key, line));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty())
    throw ConfigError("'" + key + "' needs at least one entry", line);
  return out;
}

// Shortest exact decimal form; locale-free, so renders hash identically
// everywhere.
inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string render_scalar(double v, Dim dim) {
  const auto& units = unit_table(dim);
  std::string s = format_double(v);
  if (!units.empty()) s += std::string(" ") + units.front().suffix;  // canonical base unit
  return s;
}

inline std::string render_list(const std::vector<double>& v, Dim dim) {
  std::string out;
  for (double x : v) {
    if (!out.empty()) out += ", ";
    out += render_scalar(x, dim);
  }
  return out;
}

// ---- schema ----------------------------------------------------------------

// One parsed value, already in canonical units.
struct KeyValue {
  double num = 0;
  long integer = 0;
  bool flag = false;
  std::string text;
  std::vector<double> list;
};

struct KeySpec {
  std::string section;  // "" for top-level keys
  std::string key;
  Dim dim;
  bool omit_when_empty = false;  // strings/lists that may be absent
  std::function<void(ExperimentConfig&, const KeyValue&)> set;
  std::function<KeyValue(const ExperimentConfig&)> get;
};

inline const std::vector<KeySpec>& config_schema() {
  auto nnum = [](const char* sec, const char* key, Dim d, auto section_member, auto member) {
    return KeySpec{
        sec, key, d, false,
        [=](ExperimentConfig& c, const KeyValue& v) { (c.*section_member).*member = v.num; },
        [=](const ExperimentConfig& c) { return KeyValue{.num = (c.*section_member).*member}; }};
  };
  auto nint = [](const char* sec, const char* key, auto section_member, auto member) {
    return KeySpec{
        sec, key, Dim::integer, false,
        [=](ExperimentConfig& c, const KeyValue& v) { (c.*section_member).*member = v.integer; },
        [=](const ExperimentConfig& c) {
          return KeyValue{.integer = (c.*section_member).*member};
        }};
  };
  auto nbool = [](const char* sec, const char* key, auto section_member, auto member) {
    return KeySpec{
        sec, key, Dim::boolean, false,
        [=](ExperimentConfig& c, const KeyValue& v) { (c.*section_member).*member = v.flag; },
        [=](const ExperimentConfig& c) { return KeyValue{.flag = (c.*section_member).*member}; }};
  };
  auto ntext = [](const char* sec, const char* key, auto section_member, auto member,
                  bool omit_empty) {
    return KeySpec{
        sec, key, Dim::text, omit_empty,
        [=](ExperimentConfig& c, const KeyValue& v) { (c.*section_member).*member = v.text; },
        [=](const ExperimentConfig& c) { return KeyValue{.text = (c.*section_member).*member}; }};
  };
  auto nlist = [](const char* sec, const char* key, Dim d, auto section_member, auto member) {
    return KeySpec{
        sec, key, d, true,
        [=](ExperimentConfig& c, const KeyValue& v) { (c.*section_member).*member = v.list; },
        [=](const ExperimentConfig& c) { return KeyValue{.list = (c.*section_member).*member}; }};
  };

  static const std::vector<KeySpec> schema = [&] {
    std::vector<KeySpec> s;
    s.push_back(KeySpec{"", "kind", Dim::text, false,
                        [](ExperimentConfig& c, const KeyValue& v) {
                          auto k = run_kind_from_token(v.text);
                          if (!k)
                            throw ConfigError(
                                "unknown kind '" + v.text +
                                "' (spectrum, power-sweep, multitone, laser-model, estimate, "
                                "thermometry)");
                          c.kind = *k;
                        },
                        [](const ExperimentConfig& c) {
                          return KeyValue{.text = c.kind ? to_token(*c.kind) : ""};
                        }});
    s.push_back(KeySpec{"", "seed", Dim::integer, false,
                        [](ExperimentConfig& c, const KeyValue& v) { c.seed = v.integer; },
                        [](const ExperimentConfig& c) { return KeyValue{.integer = c.seed}; }});
    s.push_back(KeySpec{"", "workers", Dim::integer, false,
                        [](ExperimentConfig& c, const KeyValue& v) { c.workers = v.integer; },
                        [](const ExperimentConfig& c) { return KeyValue{.integer = c.workers}; }});

    auto sys = &ExperimentConfig::system;
    s.push_back(nnum("system", "zero_field_splitting", Dim::frequency, sys,
                     &SystemSection::zero_field_splitting));
    s.push_back(nnum("system", "field", Dim::field, sys, &SystemSection::field));
    s.push_back(nnum("system", "temperature", Dim::temperature, sys, &SystemSection::temperature));
    s.push_back(nnum("system", "n14_hyperfine", Dim::frequency, sys, &SystemSection::n14_hyperfine));
    s.push_back(
        nnum("system", "c13_hyperfine_zz", Dim::frequency, sys, &SystemSection::c13_hyperfine_zz));
    s.push_back(
        nnum("system", "c13_hyperfine_zx", Dim::frequency, sys, &SystemSection::c13_hyperfine_zx));
    s.push_back(nbool("system", "include_n14", sys, &SystemSection::include_n14));

    auto dis = &ExperimentConfig::dissipator;
    s.push_back(nnum("dissipator", "optical_pump", Dim::frequency, dis,
                     &DissipatorSection::optical_pump));
    s.push_back(nnum("dissipator", "electron_dephasing", Dim::frequency, dis,
                     &DissipatorSection::electron_dephasing));
    s.push_back(nnum("dissipator", "electron_t1", Dim::frequency, dis,
                     &DissipatorSection::electron_t1));
    s.push_back(nnum("dissipator", "nuclear_t1", Dim::frequency, dis,
                     &DissipatorSection::nuclear_t1));

    auto drv = &ExperimentConfig::drive;
    s.push_back(nnum("drive", "rabi", Dim::frequency, drv, &DriveSection::rabi));
    s.push_back(nnum("drive", "frequency", Dim::frequency, drv, &DriveSection::frequency));
    s.push_back(nnum("drive", "sweep_start", Dim::frequency, drv, &DriveSection::sweep_start));
    s.push_back(nnum("drive", "sweep_stop", Dim::frequency, drv, &DriveSection::sweep_stop));
    s.push_back(nint("drive", "sweep_points", drv, &DriveSection::sweep_points));
    s.push_back(nnum("drive", "rabi_start", Dim::frequency, drv, &DriveSection::rabi_start));
    s.push_back(nnum("drive", "rabi_stop", Dim::frequency, drv, &DriveSection::rabi_stop));
    s.push_back(nint("drive", "rabi_points", drv, &DriveSection::rabi_points));
    s.push_back(nnum("drive", "rabi_per_sqrt_watt", Dim::calibration, drv,
                     &DriveSection::rabi_per_sqrt_watt));
    s.push_back(nlist("drive", "tones", Dim::frequency_list, drv, &DriveSection::tones));
    s.push_back(nlist("drive", "tone_rabis", Dim::frequency_list, drv, &DriveSection::tone_rabis));
    s.push_back(nlist("drive", "tone_phases", Dim::angle_list, drv, &DriveSection::tone_phases));
    s.push_back(ntext("drive", "strategy", drv, &DriveSection::strategy, false));

    auto pro = &ExperimentConfig::protocol;
    s.push_back(ntext("protocol", "mode", pro, &ProtocolSection::mode, false));
    s.push_back(nnum("protocol", "duration", Dim::time, pro, &ProtocolSection::duration));

    auto las = &ExperimentConfig::laser;
    s.push_back(nnum("laser", "alpha", Dim::heating, las, &LaserSection::alpha));
    s.push_back(nnum("laser", "beta", Dim::number, las, &LaserSection::beta));
    s.push_back(nnum("laser", "scale", Dim::number, las, &LaserSection::scale));
    s.push_back(
        nnum("laser", "base_temperature", Dim::temperature, las, &LaserSection::base_temperature));
    s.push_back(nnum("laser", "density_start", Dim::intensity, las, &LaserSection::density_start));
    s.push_back(nnum("laser", "density_stop", Dim::intensity, las, &LaserSection::density_stop));
    s.push_back(nint("laser", "density_points", las, &LaserSection::density_points));

    auto est = &ExperimentConfig::estimate;
    s.push_back(nnum("estimate", "signal_ratio", Dim::number, est, &EstimateSection::signal_ratio));
    s.push_back(nnum("estimate", "field_nmr", Dim::field, est, &EstimateSection::field_nmr));
    s.push_back(nnum("estimate", "field_dnp", Dim::field, est, &EstimateSection::field_dnp));
    s.push_back(nnum("estimate", "temperature_sample", Dim::temperature, est,
                     &EstimateSection::temperature_sample));
    s.push_back(nnum("estimate", "temperature_laser", Dim::temperature, est,
                     &EstimateSection::temperature_laser));

    auto thm = &ExperimentConfig::thermometry;
    s.push_back(ntext("thermometry", "input", thm, &ThermometrySection::input, true));
    s.push_back(nnum("thermometry", "reference_splitting", Dim::frequency, thm,
                     &ThermometrySection::reference_splitting));
    s.push_back(nnum("thermometry", "reference_temperature", Dim::temperature, thm,
                     &ThermometrySection::reference_temperature));

    auto out = &ExperimentConfig::output;
    s.push_back(ntext("output", "directory", out, &OutputSection::directory, true));
    s.push_back(ntext("output", "prefix", out, &OutputSection::prefix, true));
    return s;
  }();
  return schema;
}

inline const KeySpec* find_key(const std::string& section, std::string_view key) {
  for (const KeySpec& k : config_schema())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

inline bool known_section(const std::string& section) {
  for (const KeySpec& k : config_schema())
    if (k.section == section) return true;
  return false;
}

inline KeyValue parse_value(std::string_view text, Dim dim, const std::string& key, int line) {
  KeyValue v;
  switch (dim) {
    case Dim::integer: v.integer = parse_integer(text, key, line); break;
    case Dim::boolean: v.flag = parse_boolean(text, key, line); break;
    case Dim::text: v.text = std::string(trim(text)); break;
    case Dim::frequency_list:
    case Dim::angle_list: v.list = parse_list(text, dim, key, line); break;
    default: v.num = parse_scalar(text, dim, key, line); break;
  }
  return v;
}

}  // namespace detail

// ---- validation -------------------------------------------------------------

inline void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!c.kind)
    fail("config must state 'kind' (spectrum, power-sweep, multitone, laser-model, estimate, "
         "thermometry)");
  if (c.seed < 0) fail("'seed' must be non-negative");
  if (c.workers < 0) fail("'workers' must be non-negative");
  if (c.system.field <= 0) fail("'system.field' must be positive");
  if (c.system.temperature <= 0) fail("'system.temperature' must be positive");
  if (c.system.zero_field_splitting <= 0) fail("'system.zero_field_splitting' must be positive");
  if (c.dissipator.optical_pump < 0 || c.dissipator.electron_dephasing < 0 ||
      c.dissipator.electron_t1 < 0 || c.dissipator.nuclear_t1 < 0)
    fail("dissipator rates must be non-negative");
  if (c.drive.rabi <= 0) fail("'drive.rabi' must be positive");
  if (c.drive.rabi_per_sqrt_watt <= 0) fail("'drive.rabi_per_sqrt_watt' must be positive");
  if (c.drive.strategy != "full" && c.drive.strategy != "averaged")
    fail("'drive.strategy' must be full or averaged");
  if (c.protocol.mode != "steady-state" && c.protocol.mode != "evolve")
    fail("'protocol.mode' must be steady-state or evolve");
  if (c.protocol.mode == "evolve" && c.protocol.duration <= 0)
    fail("'protocol.duration' must be positive when mode is evolve");
  const long kMaxPoints = 200000;
  switch (*c.kind) {
    case RunKind::spectrum:
      if (c.drive.sweep_points < 2 || c.drive.sweep_points > kMaxPoints)
        fail("'drive.sweep_points' must be between 2 and 200000");
      if (!(c.drive.sweep_stop > c.drive.sweep_start))
        fail("'drive.sweep_stop' must exceed 'drive.sweep_start'");
      break;
    case RunKind::power_sweep:
      if (c.drive.rabi_points < 2 || c.drive.rabi_points > kMaxPoints)
        fail("'drive.rabi_points' must be between 2 and 200000");
      if (!(c.drive.rabi_stop > c.drive.rabi_start) || c.drive.rabi_start <= 0)
        fail("power sweeps need 0 < rabi_start < rabi_stop");
      break;
    case RunKind::multitone: {
      if (c.drive.tones.empty()) fail("a multitone run needs 'drive.tones'");
      size_t n = c.drive.tones.size();
      if (!c.drive.tone_rabis.empty() && c.drive.tone_rabis.size() != n)
        fail("'drive.tone_rabis' must match 'drive.tones' in length");
      if (!c.drive.tone_phases.empty() && c.drive.tone_phases.size() != n)
        fail("'drive.tone_phases' must match 'drive.tones' in length");
      for (double r : c.drive.tone_rabis)
        if (r <= 0) fail("'drive.tone_rabis' entries must be positive");
      break;
    }
    case RunKind::laser_model:
      if (c.laser.alpha <= 0 || c.laser.beta <= 0 || c.laser.scale <= 0 ||
          c.laser.base_temperature <= 0)
        fail("laser model parameters must be positive");
      if (c.laser.density_points < 2 || c.laser.density_points > kMaxPoints)
        fail("'laser.density_points' must be between 2 and 200000");
      if (!(c.laser.density_stop > c.laser.density_start) || c.laser.density_start <= 0)
        fail("laser sweeps need 0 < density_start < density_stop");
      break;
    case RunKind::estimate:
      if (c.estimate.signal_ratio <= 0) fail("'estimate.signal_ratio' must be positive");
      if (c.estimate.field_nmr <= 0 || c.estimate.field_dnp <= 0)
        fail("estimate fields must be positive");
      if (c.estimate.temperature_sample <= 0 || c.estimate.temperature_laser <= 0)
        fail("estimate temperatures must be positive");
      break;
    case RunKind::thermometry:
      if (c.thermometry.input.empty()) fail("a thermometry run needs 'thermometry.input'");
      if (c.thermometry.reference_splitting <= 0 || c.thermometry.reference_temperature <= 0)
        fail("thermometry references must be positive");
      break;
  }
}

// ---- rendering ---------------------------------------------------------------

// Canonical text form: fixed section and key order, base units, shortest
// exact decimals. parse(render(c)) reproduces c; the fingerprint hashes this.
inline std::string render_config(const ExperimentConfig& c) {
  using detail::Dim;
  std::string out;
  std::string current_section;
  bool first = true;
  for (const detail::KeySpec& k : detail::config_schema()) {
    detail::KeyValue v = k.get(c);
    if (k.omit_when_empty && v.text.empty() && v.list.empty()) continue;
    if (k.section != current_section || first) {
      if (!k.section.empty()) {
        if (!first) out += "\n";
        out += "[" + k.section + "]\n";
      }
      current_section = k.section;
      first = false;
    }
    out += k.key;
    out += " = ";
    switch (k.dim) {
      case Dim::integer: out += std::to_string(v.integer); break;
      case Dim::boolean: out += v.flag ? "true" : "false"; break;
      case Dim::text: out += v.text; break;
      case Dim::frequency_list:
      case Dim::angle_list: out += detail::render_list(v.list, k.dim); break;
      default: out += detail::render_scalar(v.num, k.dim); break;
    }
    out += "\n";
  }
  return out;
}

// ---- parsing ------------------------------------------------------------------

namespace detail {

inline ExperimentConfig parse_keyvalue_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::pair<std::string, int>> seen;  // "section.key" -> first line
  std::string section;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    ++line_no;
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;

    size_t hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string_view t = trim(line);
    if (t.empty()) continue;

    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("expected a section header like [system]", line_no);
      std::string name(trim(t.substr(1, t.size() - 2)));
      if (!known_section(name) || name.empty())
        throw ConfigError("unknown section [" + name + "]", line_no);
      section = name;
      continue;
    }

    size_t eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected key = value", line_no);
    std::string key(trim(t.substr(0, eq)));
    std::string_view value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("expected key = value", line_no);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);

    const KeySpec* spec = find_key(section, key);
    if (!spec) {
      std::string where = section.empty() ? "before the first section" : "in [" + section + "]";
      throw ConfigError("unknown key '" + key + "' " + where, line_no);
    }
    std::string full = section + "." + key;
    for (const auto& [prev, prev_line] : seen)
      if (prev == full)
        throw ConfigError("duplicate key '" + key + "' (already set at line " +
                              std::to_string(prev_line) + ")",
                          line_no);
    seen.emplace_back(full, line_no);
    try {
      spec->set(c, parse_value(value, spec->dim, key, line_no));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(e.what()), line_no);
    }
    if (eol == std::string::npos) break;
  }

  for (const KeySpec& k : config_schema()) {
    std::string full = (k.section.empty() ? "" : k.section + ".") + k.key;
    bool set = false;
    for (const auto& [prev, l] : seen)
      if (prev == (k.section + "." + k.key)) set = true;
    if (!set) c.defaulted.push_back(full);
  }
  return c;
}

inline ExperimentConfig parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object");

  ExperimentConfig c;
  std::vector<std::string> seen;
  auto apply = [&](const std::string& section, const std::string& key,
                   const nlohmann::json& val) {
    const KeySpec* spec = find_key(section, key);
    std::string full = (section.empty() ? "" : section + ".") + key;
    if (!spec) throw ConfigError("unknown key '" + full + "'");
    KeyValue v;
    if (val.is_string()) {
      v = parse_value(val.get<std::string>(), spec->dim, key, 0);
    } else if (val.is_boolean() && spec->dim == Dim::boolean) {
      v.flag = val.get<bool>();
    } else if (val.is_number_integer() && spec->dim == Dim::integer) {
      v.integer = val.get<long>();
    } else if (val.is_number() && spec->dim == Dim::number) {
      v.num = val.get<double>();
    } else if (val.is_array() &&
               (spec->dim == Dim::frequency_list || spec->dim == Dim::angle_list)) {
      std::string joined;
      for (const auto& item : val) {
        if (!item.is_string())
          throw ConfigError("'" + full + "' entries must be strings with units");
        if (!joined.empty()) joined += ", ";
        joined += item.get<std::string>();
      }
      v = parse_value(joined, spec->dim, key, 0);
    } else {
      throw ConfigError("'" + full + "' has the wrong JSON type (unit-bearing values are "
                        "strings like \"17.6 mT\")");
    }
    spec->set(c, v);
    seen.push_back(section + "." + key);
  };

  for (const auto& [key, val] : j.items()) {
    if (val.is_object()) {
      if (!known_section(key)) throw ConfigError("unknown section '" + key + "'");
      for (const auto& [inner, ival] : val.items()) apply(key, inner, ival);
    } else {
      apply("", key, val);
    }
  }
  for (const KeySpec& k : config_schema()) {
    bool set = false;
    for (const auto& s : seen)
      if (s == k.section + "." + k.key) set = true;
    if (!set) c.defaulted.push_back((k.section.empty() ? "" : k.section + ".") + k.key);
  }
  return c;
}

}  // namespace detail

// Accepts the key = value grammar or a JSON object with the same shape.
// The optional fallback supplies the run kind when the text leaves it out
// (the CLI passes its subcommand here). The unchecked variant skips the
// range validation so callers can layer overrides on top first.
inline ExperimentConfig parse_config_unchecked(
    const std::string& text, std::optional<RunKind> fallback_kind = std::nullopt) {
  size_t first = text.find_first_not_of(" \t\r\n");
  ExperimentConfig c = (first != std::string::npos && text[first] == '{')
                           ? detail::parse_json_config(text)
                           : detail::parse_keyvalue_config(text);
  if (!c.kind && fallback_kind) c.kind = fallback_kind;
  return c;
}

inline ExperimentConfig parse_config(const std::string& text,
                                     std::optional<RunKind> fallback_kind = std::nullopt) {
  ExperimentConfig c = parse_config_unchecked(text, fallback_kind);
  validate_config(c);
  return c;
}

}  // namespace nvdnp
