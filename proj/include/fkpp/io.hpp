#pragma once

// CSV and run-manifest emission.  Numbers are serialized with 15
// significant digits, '.' decimal separator, no locale dependence.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fkpp {

inline std::string fmt_g15(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

inline std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

constexpr const char* kToolVersion = "fkpplab 0.1.0";

// Build the common manifest skeleton; callers add parameters and write it
// last, after every listed output exists.
inline nlohmann::json make_manifest(const std::string& subcommand,
                                    const nlohmann::json& params,
                                    const std::string& started) {
  nlohmann::json m;
  m["subcommand"] = subcommand;
  m["parameters"] = params;
  m["tool_version"] = kToolVersion;
  m["started"] = started;
  m["finished"] = "";  // filled just before writing
  m["outputs"] = nlohmann::json::array();
  m["warnings"] = nlohmann::json::array();
  return m;
}

inline void write_manifest(const std::filesystem::path& path, nlohmann::json m) {
  m["finished"] = iso_timestamp();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_manifest: cannot open " + path.string());
  os << m.dump(2) << "\n";
}

}  // namespace fkpp
