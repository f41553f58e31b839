#pragma once
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fsuc/errors.hpp"

namespace fsuc {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    fail(ErrorKind::config, "csv column not found: " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open csv: " + path);
  CsvTable t;
  std::string line;
  bool header = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (header) {
      while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
      header = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::config, "csv parse failure at " + path + ":" + std::to_string(lineno) + " cell '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size())
      fail(ErrorKind::config, "csv row width mismatch at " + path + ":" + std::to_string(lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) fail(ErrorKind::config, "csv has no header: " + path);
  return t;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write csv: " + path);
  for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  out.precision(12);
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
}

}  // namespace fsuc
