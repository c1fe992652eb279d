#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "tikhoprox/core.hpp"
#include "tikhoprox/dynamics.hpp"
#include "tikhoprox/solver.hpp"

namespace tikhoprox {

// Shortest round-trip decimal form (std::to_chars), locale-independent.
// Identical inputs give identical bytes, which is what makes repeated runs
// byte-comparable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return kNaN;
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("bad numeric field '" + s + "'");
  return v;
}

// Fixed column layout shared by every algorithm's trace.
inline constexpr const char* kTraceHeader =
    "k,beta_k,f_val,gap,dist_xstar,dist_y,step,subgrad_res,E_k";

inline void write_trace_csv(std::ostream& out, const RunTrace& trace,
                            const std::optional<Vec>& xstar) {
  out << kTraceHeader << "\n";
  for (const auto& rec : trace.records) {
    double dist = xstar ? (rec.x - *xstar).norm() : kNaN;
    out << format_int(rec.k) << ',' << format_double(rec.beta) << ','
        << format_double(rec.f_val) << ',' << format_double(rec.gap) << ','
        << format_double(dist) << ',' << format_double(rec.dist_y) << ','
        << format_double(rec.step) << ',' << format_double(rec.subgrad_res)
        << ',' << format_double(rec.E) << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const RunTrace& trace,
                            const std::optional<Vec>& xstar) {
  std::ofstream out(path, std::ios::binary);  // binary: no \r\n surprises
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace, xstar);
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  int n = traj.x.empty() ? 0 : int(traj.x.front().size());
  out << "t";
  for (int j = 0; j < n; ++j) out << ",x" << j;
  if (!traj.v.empty())
    for (int j = 0; j < n; ++j) out << ",v" << j;
  out << ",gap,dist_y,grad_norm,E\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    out << format_double(traj.t[i]);
    for (int j = 0; j < n; ++j) out << ',' << format_double(traj.x[i][j]);
    if (!traj.v.empty())
      for (int j = 0; j < n; ++j) out << ',' << format_double(traj.v[i][j]);
    out << ',' << format_double(i < traj.gap.size() ? traj.gap[i] : kNaN);
    out << ','
        << format_double(i < traj.dist_y.size() ? traj.dist_y[i] : kNaN);
    out << ','
        << format_double(i < traj.grad_norm.size() ? traj.grad_norm[i] : kNaN);
    out << ',' << format_double(i < traj.E.size() ? traj.E[i] : kNaN) << "\n";
  }
}

inline void write_trajectory_csv(const std::string& path,
                                 const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_trajectory_csv(out, traj);
}

// Generic numeric CSV, column-addressable; the reader half of round-trips.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    return -1;
  }
  std::vector<double> column(const std::string& name) const {
    int idx = column_index(name);
    if (idx < 0) throw ConfigError("no column named '" + name + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[std::size_t(idx)]);
    return out;
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream hdr(line);
  std::string cell;
  while (std::getline(hdr, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(parse_double(cell));
    if (vals.size() != table.columns.size())
      throw ConfigError("CSV row has " + std::to_string(vals.size()) +
                        " fields, header has " +
                        std::to_string(table.columns.size()));
    table.rows.push_back(std::move(vals));
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace tikhoprox
