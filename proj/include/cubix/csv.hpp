#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cubix/engine.hpp"

namespace cubix {

inline std::string csv_header() {
  std::string h = "t,x,y,z,roll,pitch,yaw";
  for (const char* prefix : {"l", "fref", "iref"})
    for (int i = 0; i < kMaxWires; ++i) h += "," + std::string(prefix) + std::to_string(i);
  return h + ",phase,events";
}

/// Shortest form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes the header and one line per kept row. With `every` > 1 only ticks
/// divisible by it (and the final tick) are kept; events on skipped rows are
/// reported on the next kept row.
inline void write_csv(const TrajectoryLog& log, std::ostream& os, int every = 1) {
  if (log.rows.empty()) throw Error("EmptyLog", "cannot write an empty trajectory");
  if (every < 1) every = 1;
  os << csv_header() << '\n';
  std::vector<std::string> pending;
  for (std::size_t r = 0; r < log.rows.size(); ++r) {
    const LogRow& row = log.rows[r];
    pending.insert(pending.end(), row.events.begin(), row.events.end());
    if (row.tick % every != 0 && r + 1 != log.rows.size()) continue;
    std::string line = format_double(row.t);
    for (double v : {row.position.x(), row.position.y(), row.position.z(), row.attitude.roll, row.attitude.pitch,
                     row.attitude.yaw})
      line += "," + format_double(v);
    for (const PerWire<double>* col : {&row.l, &row.f_ref, &row.i_ref})
      for (int i = 0; i < kMaxWires; ++i) line += "," + (log.wire_present[i] ? format_double((*col)[i]) : std::string());
    line += "," + row.phase + ",";
    for (std::size_t e = 0; e < pending.size(); ++e) line += (e ? ";" : "") + pending[e];
    pending.clear();
    os << line << '\n';
  }
}

inline void emit_csv(const TrajectoryLog& log, const std::string& path, int every = 1) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open '" + path + "' for writing");
  write_csv(log, f, every);
  if (!f) throw Error("IoError", "failed writing '" + path + "'");
}

/// Parsed CSV: header names plus the raw fields of each data line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw Error("UnknownColumn", "no column '" + name + "'");
  }
  double number(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw Error("ParseError", "empty CSV");
  t.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
    if (t.rows.back().size() != t.header.size())
      throw Error("ParseError", "CSV line " + std::to_string(t.rows.size() + 1) + " has wrong field count");
  }
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("IoError", "cannot open '" + path + "'");
  return parse_csv(f);
}

}  // namespace cubix
