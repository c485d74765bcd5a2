#pragma once

// Result persistence: FNV-1a fingerprints, atomic file writes, CSV in and
// out, and the run manifest. Everything formats numbers with shortest exact
// decimals so identical configs produce identical bytes.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvdnp/config.hpp"
#include "nvdnp/errors.hpp"

namespace nvdnp {

// ---- fingerprints -----------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Hash of the canonical rendering, so logically equal configs agree even when
// the files differ in comments, order, or unit choices.  Output placement and
// the worker count are scrubbed first: they change where results land and how
// fast they arrive, not what they contain, and rerunning the same experiment
// into a different directory should produce identically named files.
inline std::string config_fingerprint(const ExperimentConfig& c) {
  ExperimentConfig scrubbed = c;
  scrubbed.output = OutputSection{};
  scrubbed.workers = 0;
  return to_hex(fnv1a64(render_config(scrubbed)));
}

// ---- atomic writes ------------------------------------------------------------

// Write through a temp name in the same directory, then rename into place.
// A crash mid-write leaves the temp file, never a truncated result.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move result into place at " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

// ---- CSV -----------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline std::string render_csv(const CsvTable& t) {
  std::string out;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::csv_escape(row[i]);
    }
    out += '\n';
  };
  emit_row(t.header);
  for (const auto& row : t.rows) emit_row(row);
  return out;
}

// Minimal reader for our own files plus hand-made inputs: quoted fields with
// doubled quotes, no multi-line fields.
inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    pos = (eol == std::string::npos) ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          field += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.push_back(field);
        field.clear();
      } else {
        field += ch;
      }
    }
    row.push_back(field);
    if (first) {
      t.header = row;
      first = false;
    } else {
      t.rows.push_back(row);
    }
  }
  return t;
}

inline std::string format_number(double v) { return detail::format_double(v); }

// ---- the manifest -----------------------------------------------------------------

struct OutputRecord {
  std::string name;      // file name inside the run directory
  std::string checksum;  // fnv1a64 of the bytes, hex
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string version = tool_version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::vector<OutputRecord> outputs;
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

inline std::string manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = nlohmann::json::array();
  for (const OutputRecord& o : m.outputs)
    j["outputs"].push_back({{"name", o.name}, {"checksum", o.checksum}, {"bytes", o.bytes}});
  return j.dump(2) + "\n";
}

}  // namespace nvdnp
