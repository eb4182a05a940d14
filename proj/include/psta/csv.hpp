#pragma once

// CSV log and metrics report persistence.
//
// Log columns (SI units, one row per controller tick, CRLF records):
//   t, x, y, z, vx, vy, vz, qw, qx, qy, qz, wx, wy, wz,
//   xd, yd, zd, psid, ex, ey, ez, eRx, eRy, eRz,
//   fu, Mu1, Mu2, Mu3, sx, sy, sz, sroll, spitch, syaw,
//   fext_x, fext_y, fext_z, Mext_1, Mext_2, Mext_3
// The quaternion (body -> world) is normalized with qw >= 0; e = p - p_d.

#include <array>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psta/metrics.hpp"
#include "psta/simulation.hpp"

namespace psta {

inline constexpr std::array<const char*, 40> kCsvColumns = {
    "t",     "x",     "y",      "z",      "vx",     "vy",     "vz",     "qw",     "qx",     "qy",
    "qz",    "wx",    "wy",     "wz",     "xd",     "yd",     "zd",     "psid",   "ex",     "ey",
    "ez",    "eRx",   "eRy",    "eRz",    "fu",     "Mu1",    "Mu2",    "Mu3",    "sx",     "sy",
    "sz",    "sroll", "spitch", "syaw",   "fext_x", "fext_y", "fext_z", "Mext_1", "Mext_2", "Mext_3"};

namespace detail {

inline std::string fmt15(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(what + " '" + path.string() + "': " + std::strerror(errno));
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error(path, "cannot open for writing");
  return out;
}

inline void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw io_error(path, "write failed for");
}

}  // namespace detail

inline std::array<double, kCsvColumns.size()> csv_row(const LogRecord& r) {
  Eigen::Quaterniond q(r.state.R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const auto& s = r.state;
  return {r.t,
          s.p.x(), s.p.y(), s.p.z(), s.v.x(), s.v.y(), s.v.z(),
          q.w(), q.x(), q.y(), q.z(),
          s.omega.x(), s.omega.y(), s.omega.z(),
          r.ref.p_d.x(), r.ref.p_d.y(), r.ref.p_d.z(), r.ref.psi_d,
          r.pos_error.x(), r.pos_error.y(), r.pos_error.z(),
          r.e_R.x(), r.e_R.y(), r.e_R.z(),
          r.input.f_u, r.input.M_u.x(), r.input.M_u.y(), r.input.M_u.z(),
          r.sigma_tran.x(), r.sigma_tran.y(), r.sigma_tran.z(),
          r.sigma_rot.x(), r.sigma_rot.y(), r.sigma_rot.z(),
          r.wrench.f_ext.x(), r.wrench.f_ext.y(), r.wrench.f_ext.z(),
          r.wrench.M_ext.x(), r.wrench.M_ext.y(), r.wrench.M_ext.z()};
}

inline void write_csv(const SimLog& log, std::ostream& out) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << "\r\n";
  for (const auto& rec : log.records) {
    const auto row = csv_row(rec);
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << detail::fmt15(row[i]);
    }
    out << "\r\n";
  }
}

inline void write_csv(const SimLog& log, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_csv(log, out);
  detail::close_out(out, path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::out_of_range("no CSV column '" + name + "'");
  }
};

/// Reads a numeric CSV with a header row (as written by write_csv).
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw detail::io_error(path, "cannot open for reading");
  CsvTable table;
  std::string line;
  auto split = [](std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(in, line)) return table;
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong number of fields");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Metrics report: human-readable summary followed by a key=value block.

struct ReportContext {
  std::string scenario;
  std::string controller;
  long identity_violations = 0;
  long actuator_clamps = 0;
};

inline void write_report(const MetricsReport& m, const ReportContext& ctx, std::ostream& out) {
  out << "Scenario:   " << ctx.scenario << "\n"
      << "Controller: " << ctx.controller << "\n"
      << "Status:     " << (m.diverged ? "DIVERGED" : "ok") << "\n\n"
      << "Tracking (window samples: " << m.samples << ")\n"
      << "  RMSE x/y/z [m]       " << detail::fmt15(m.rmse.x()) << "  " << detail::fmt15(m.rmse.y()) << "  "
      << detail::fmt15(m.rmse.z()) << "\n"
      << "  max |e| x/y/z [m]    " << detail::fmt15(m.max_abs_error.x()) << "  "
      << detail::fmt15(m.max_abs_error.y()) << "  " << detail::fmt15(m.max_abs_error.z()) << "\n"
      << "  relative pose error  " << detail::fmt15(m.relative_pose_error) << " m\n"
      << "  settling time        " << detail::fmt15(m.settling_time) << " s\n"
      << "Chattering (total variation)\n"
      << "  M_u 1/2/3 [N m]      " << detail::fmt15(m.chattering.x()) << "  " << detail::fmt15(m.chattering.y())
      << "  " << detail::fmt15(m.chattering.z()) << "\n"
      << "  f_u [N]              " << detail::fmt15(m.chattering_thrust) << "\n\n";

  out << "[metrics]\n"
      << "scenario=" << ctx.scenario << "\n"
      << "controller=" << ctx.controller << "\n"
      << "diverged=" << (m.diverged ? 1 : 0) << "\n"
      << "samples=" << m.samples << "\n"
      << "rmse_x=" << detail::fmt15(m.rmse.x()) << "\n"
      << "rmse_y=" << detail::fmt15(m.rmse.y()) << "\n"
      << "rmse_z=" << detail::fmt15(m.rmse.z()) << "\n"
      << "max_err_x=" << detail::fmt15(m.max_abs_error.x()) << "\n"
      << "max_err_y=" << detail::fmt15(m.max_abs_error.y()) << "\n"
      << "max_err_z=" << detail::fmt15(m.max_abs_error.z()) << "\n"
      << "relative_pose_error=" << detail::fmt15(m.relative_pose_error) << "\n"
      << "chattering_M1=" << detail::fmt15(m.chattering.x()) << "\n"
      << "chattering_M2=" << detail::fmt15(m.chattering.y()) << "\n"
      << "chattering_M3=" << detail::fmt15(m.chattering.z()) << "\n"
      << "chattering_fu=" << detail::fmt15(m.chattering_thrust) << "\n"
      << "settling_time=" << detail::fmt15(m.settling_time) << "\n"
      << "identity_violations=" << ctx.identity_violations << "\n"
      << "actuator_clamps=" << ctx.actuator_clamps << "\n";
}

inline void write_report(const MetricsReport& m, const ReportContext& ctx, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_report(m, ctx, out);
  detail::close_out(out, path);
}

/// Parses the key=value block of a report (lines after "[metrics]").
inline std::vector<std::pair<std::string, std::string>> parse_report(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  bool in_block = false;
  while (std::getline(in, line)) {
    if (line == "[metrics]") {
      in_block = true;
      continue;
    }
    if (!in_block) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace psta
