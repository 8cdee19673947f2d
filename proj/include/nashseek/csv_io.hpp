#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nashseek/ode.hpp"
#include "nashseek/seeker.hpp"

namespace nashseek {

// Locale-independent shortest round-trip formatting; values written this way
// read back bit-identical.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: bad numeric field '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Trajectory schema: header row
//   k,khat,hat_a_1,a_1,r_1,...,hat_a_N,a_N,r_N,lambda
// then one newline-terminated data row per record.
inline std::string trajectory_csv_header(std::size_t nodes) {
  std::ostringstream os;
  os << "k,khat";
  for (std::size_t j = 1; j <= nodes; ++j)
    os << ",hat_a_" << j << ",a_" << j << ",r_" << j;
  os << ",lambda";
  return os.str();
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << trajectory_csv_header(traj.nodes) << "\n";
  for (const auto& rec : traj.records) {
    out << rec.k << ',' << format_double(rec.clock);
    for (std::size_t j = 0; j < traj.nodes; ++j) {
      out << ',' << format_double(rec.intermediary[j]) << ','
          << format_double(rec.actions[j]) << ',' << format_double(rec.payoffs[j]);
    }
    out << ',' << format_double(rec.rate) << "\n";
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open for writing: " + path);
  write_trajectory_csv(f, traj);
  if (!f) throw std::runtime_error("csv: write failed: " + path);
}

inline Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "k" || header[1] != "khat" ||
      header.back() != "lambda" || (header.size() - 3) % 3 != 0)
    throw std::invalid_argument("csv: unrecognized trajectory header");
  const std::size_t nodes = (header.size() - 3) / 3;

  Trajectory traj;
  traj.nodes = nodes;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw std::invalid_argument("csv: row has wrong field count");
    TrajectoryRecord rec;
    rec.k = static_cast<std::size_t>(parse_double(f[0]));
    rec.clock = parse_double(f[1]);
    rec.intermediary.resize(nodes);
    rec.actions.resize(nodes);
    rec.payoffs.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      rec.intermediary[j] = parse_double(f[2 + 3 * j]);
      rec.actions[j] = parse_double(f[3 + 3 * j]);
      rec.payoffs[j] = parse_double(f[4 + 3 * j]);
    }
    rec.rate = parse_double(f.back());
    traj.records.push_back(std::move(rec));
  }
  if (traj.records.empty()) throw std::invalid_argument("csv: no data rows");
  return traj;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("csv: cannot open: " + path);
  return read_trajectory_csv(f);
}

inline void write_ode_csv(const std::string& path, const OdeSolution& sol) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open for writing: " + path);
  const std::size_t n = sol.nodes();
  f << "t";
  for (std::size_t j = 1; j <= n; ++j) f << ",hat_a_" << j << ",a_" << j;
  f << "\n";
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    f << format_double(sol.t[i]);
    for (std::size_t j = 0; j < n; ++j)
      f << ',' << format_double(sol.intermediary[i][j]) << ','
        << format_double(sol.actions[i][j]);
    f << "\n";
  }
}

// Two-column key,value report; every value formatted for exact re-reading.
inline void write_report_csv(const std::string& path,
                             const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open for writing: " + path);
  f << "key,value\n";
  for (const auto& [k, v] : rows) f << k << ',' << format_double(v) << "\n";
}

}  // namespace nashseek
