#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "muskat/diagnostics.hpp"
#include "muskat/error.hpp"
#include "muskat/grid.hpp"

namespace muskat {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("refusing to write a non-finite number");
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InputError("cannot parse number '" + s + "'");
  return v;
}

/// One NDJSON line; keys always in this order. Throws NumericalError on a
/// non-finite entry before anything is produced.
inline std::string record_to_ndjson(const DiagnosticsRecord& r) {
  auto num = [](double v) { return format_double(v); };
  std::ostringstream os;
  os << "{\"t\":" << num(r.t) << ",\"step\":" << r.step << ",\"dt\":" << num(r.dt) << ",\"E\":" << num(r.energy.total)
     << ",\"hk_f\":" << num(r.energy.upper_hk) << ",\"hk_g\":" << num(r.energy.lower_hk)
     << ",\"d_sup\":" << num(r.energy.d_sup) << ",\"u_sup\":" << num(r.u_sup) << ",\"bound_bracket\":[";
  for (std::size_t i = 0; i < r.brackets.size(); ++i) {
    if (i) os << ',';
    os << "{\"gamma\":" << num(r.brackets[i].gamma) << ",\"value\":" << num(r.brackets[i].value) << '}';
  }
  os << "],\"mean_f\":" << num(r.mean_f) << ",\"mean_g\":" << (r.mean_g ? num(*r.mean_g) : "null")
     << ",\"min_gap\":" << (r.min_gap ? num(*r.min_gap) : "null") << '}';
  return os.str();
}

inline DiagnosticsRecord record_from_json(const nlohmann::json& j) {
  DiagnosticsRecord r;
  try {
    r.t = j.at("t").get<double>();
    r.step = j.at("step").get<std::size_t>();
    r.dt = j.at("dt").get<double>();
    r.energy.total = j.at("E").get<double>();
    r.energy.upper_hk = j.at("hk_f").get<double>();
    r.energy.lower_hk = j.at("hk_g").get<double>();
    r.energy.d_sup = j.at("d_sup").get<double>();
    r.u_sup = j.at("u_sup").get<double>();
    for (const auto& b : j.at("bound_bracket")) r.brackets.push_back({b.at("gamma").get<double>(), b.at("value").get<double>()});
    r.mean_f = j.at("mean_f").get<double>();
    if (!j.at("mean_g").is_null()) r.mean_g = j.at("mean_g").get<double>();
    if (!j.at("min_gap").is_null()) r.min_gap = j.at("min_gap").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed diagnostics record: ") + e.what());
  }
  return r;
}

inline std::vector<DiagnosticsRecord> read_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open diagnostics stream '" + path.string() + "'");
  std::vector<DiagnosticsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("malformed NDJSON line: ") + e.what());
    }
  }
  return out;
}

/// CSV with header x1,x2,f,g in row-major node order. A single interface
/// leaves the g field empty.
inline void write_snapshot(const std::filesystem::path& path, const ContourPair& pair) {
  const Grid2& grid = pair.grid();
  const std::size_t n = grid.resolution();
  std::string out = "x1,x2,f,g\n";
  out.reserve(grid.size() * 64);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i * n + j;
      out += format_double(grid.coordinate(i));
      out += ',';
      out += format_double(grid.coordinate(j));
      out += ',';
      out += format_double(pair.upper()[k]);
      out += ',';
      if (pair.has_lower()) out += format_double(pair.lower()[k]);
      out += '\n';
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write snapshot '" + path.string() + "'");
  f << out;
}

/// Heights read back from a snapshot; `lower` is empty for a single interface.
struct SnapshotData {
  std::vector<double> upper;
  std::optional<std::vector<double>> lower;
};

inline SnapshotData read_snapshot(const std::filesystem::path& path, const Grid2& grid) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open snapshot '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,f,g") throw InputError("snapshot '" + path.string() + "' has a bad header");
  SnapshotData d;
  std::vector<double> lower;
  bool any_lower = false, any_missing = false;
  std::size_t row = 0;
  const std::size_t n = grid.resolution();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 4) throw InputError("snapshot row " + std::to_string(row + 1) + " needs 4 fields");
    const double x1 = parse_double(cells[0]), x2 = parse_double(cells[1]);
    const std::size_t i = row / n, j = row % n;
    if (row >= grid.size() || x1 != grid.coordinate(i) || x2 != grid.coordinate(j))
      throw InputError("snapshot row " + std::to_string(row + 1) + " does not match the scenario grid");
    d.upper.push_back(parse_double(cells[2]));
    if (cells[3].empty()) {
      any_missing = true;
      lower.push_back(0.0);
    } else {
      any_lower = true;
      lower.push_back(parse_double(cells[3]));
    }
    ++row;
  }
  if (row != grid.size()) throw InputError("snapshot has " + std::to_string(row) + " rows, expected " + std::to_string(grid.size()));
  if (any_lower && any_missing) throw InputError("snapshot mixes present and missing g values");
  if (any_lower) d.lower = std::move(lower);
  return d;
}

/// Snapshot bookkeeping: snapshots/index.csv with rows step,t,file.
struct SnapshotEntry {
  std::size_t step;
  double t;
  std::string file;
};

inline std::vector<SnapshotEntry> read_snapshot_index(const std::filesystem::path& dir) {
  const auto path = dir / "index.csv";
  std::ifstream in(path);
  if (!in) throw InputError("cannot open snapshot index '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "step,t,file") throw InputError("snapshot index has a bad header");
  std::vector<SnapshotEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) throw InputError("malformed snapshot index row '" + line + "'");
    out.push_back({static_cast<std::size_t>(std::stoull(line.substr(0, a))), parse_double(line.substr(a + 1, b - a - 1)),
                   line.substr(b + 1)});
  }
  return out;
}

inline std::string snapshot_name(std::size_t step) {
  std::string s = std::to_string(step);
  if (s.size() < 8) s.insert(0, 8 - s.size(), '0');
  return "step_" + s + ".csv";
}

}  // namespace muskat
