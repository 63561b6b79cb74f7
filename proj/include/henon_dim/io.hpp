#pragma once

// Map files, hashes, output headers and atomic file writes.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "henon_dim/henon_map.hpp"

namespace henon {

using json = nlohmann::json;

inline constexpr const char* kToolName = "henon-dim";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "HENON_DIM_OUT_DIR";

class MapFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline cplx complex_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw MapFileError(where + ": expected [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline HenonMap map_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("factors") || !doc["factors"].is_array())
    throw MapFileError("map document needs a \"factors\" array");
  std::vector<HenonFactor> factors;
  for (std::size_t i = 0; i < doc["factors"].size(); ++i) {
    const auto& f = doc["factors"][i];
    const std::string where = "factor " + std::to_string(i);
    if (!f.is_object() || !f.contains("coeffs") || !f.contains("a") || !f["coeffs"].is_array())
      throw MapFileError(where + ": needs \"coeffs\" and \"a\"");
    std::vector<cplx> c;
    for (const auto& x : f["coeffs"]) c.push_back(complex_from_json(x, where));
    try {
      factors.push_back(make_factor(std::move(c), complex_from_json(f["a"], where)));
    } catch (const std::invalid_argument& e) {
      throw MapFileError(where + ": " + e.what());
    }
  }
  try {
    return make_map(std::move(factors));
  } catch (const std::invalid_argument& e) {
    throw MapFileError(e.what());
  }
}

inline json map_to_json(const HenonMap& g) {
  json factors = json::array();
  for (const auto& f : g.factors()) {
    json c = json::array();
    for (const auto& x : f.poly.coefficients()) c.push_back({x.real(), x.imag()});
    factors.push_back({{"coeffs", c}, {"a", {f.twist.real(), f.twist.imag()}}});
  }
  return {{"factors", factors}};
}

inline HenonMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapFileError("cannot open map file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw MapFileError(path.string() + ": " + e.what());
  }
  return map_from_json(doc);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline std::string map_hash(const HenonMap& g) { return hex64(fnv1a(map_to_json(g).dump())); }
inline std::string config_hash(const json& config) { return hex64(fnv1a(config.dump())); }

struct OutputHeader {
  std::string subcommand;
  std::string map_hash;
  std::string config_hash;
  std::uint64_t seed = 0;

  json to_json() const {
    return {{"tool", kToolName},        {"tool_version", kToolVersion}, {"subcommand", subcommand},
            {"map_hash", map_hash},     {"config_hash", config_hash},   {"seed", seed}};
  }
  std::string csv_block() const {
    std::ostringstream o;
    o << "# tool: " << kToolName << "\n# tool_version: " << kToolVersion << "\n# subcommand: " << subcommand
      << "\n# map_hash: " << map_hash << "\n# config_hash: " << config_hash << "\n# seed: " << seed << "\n";
    return o.str();
  }
};

/// Shortest text that reads back to the same double.
inline std::string fmt(double x) {
  char buf[32];
  for (int p = 15; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Bulk table with a commented header block.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(cells);
  }
  std::string str(const OutputHeader& h) const {
    std::string out = h.csv_block();
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out;
  }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temp file then renames over the target, so readers
/// never see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path.string());
  }
}

/// The environment variable, when set and non-empty, replaces the output dir.
inline std::filesystem::path output_dir(const std::string& requested) {
  const char* env = std::getenv(kOutputDirEnv);
  if (env != nullptr && *env != '\0') return env;
  return requested.empty() ? std::filesystem::path(".") : std::filesystem::path(requested);
}

}  // namespace henon
