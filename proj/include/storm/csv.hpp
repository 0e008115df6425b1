#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace storm {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad numeric field: '" + s + "'");
  }
  return v;
}

struct CsvRow {
  std::vector<std::string> cells;

  CsvRow& add(const std::string& s) {
    cells.push_back(s);
    return *this;
  }
  CsvRow& add(double v) { return add(format_double(v)); }
  CsvRow& add(std::int64_t v) { return add(std::to_string(v)); }
  CsvRow& add(int v) { return add(std::to_string(v)); }
  CsvRow& add(bool v) { return add(std::string(v ? "1" : "0")); }
};

inline void write_csv_row(std::ostream& os, const CsvRow& row) {
  for (std::size_t i = 0; i < row.cells.size(); ++i) {
    if (i) os << ',';
    os << row.cells[i];
  }
  os << '\n';
}

/// Comma-split reader; fields never contain commas or quotes in our files.
inline std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace storm
