#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chlab/field.hpp"

namespace chlab::fields {

namespace detail {

/// Scientific notation with 17 significant digits; round-trips every finite
/// double bit-exactly through from_chars.
inline std::string format_value(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

inline double parse_value(std::string_view s, const char* what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(std::string("field CSV: malformed ") + what + " value '" +
                std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Writes a snapshot as CSV with header "x,u", one row per grid point.
inline void write_csv(std::ostream& os, const Field<double>& f) {
  os << "x,u\n";
  for (Index j = 0; j < f.size(); ++j) {
    os << detail::format_value(f.grid.point(j)) << ','
       << detail::format_value(f.values[j]) << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path,
                      const Field<double>& f) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv(os, f);
}

/// Raw columns of a snapshot CSV; grid-free form used by the compare tool.
struct CsvColumns {
  std::vector<double> x;
  std::vector<double> u;
};

inline CsvColumns read_csv_columns(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line) || (line != "x,u" && line != "x,u\r")) {
    throw Error("field CSV '" + path.string() + "': missing 'x,u' header");
  }
  CsvColumns cols;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error("field CSV '" + path.string() + "': malformed row '" + line +
                  "'");
    }
    cols.x.push_back(detail::parse_value({line.data(), comma}, "x"));
    cols.u.push_back(detail::parse_value(
        {line.data() + comma + 1, line.size() - comma - 1}, "u"));
  }
  return cols;
}

/// Reads a snapshot written by write_csv back onto a known grid.  The x
/// column must agree with the grid points to within an absolute tolerance.
inline Field<double> read_csv(const std::filesystem::path& path,
                              const Grid<double>& grid,
                              double x_tol = 1e-12) {
  const CsvColumns cols = read_csv_columns(path);
  if (static_cast<Index>(cols.x.size()) != grid.size()) {
    throw GridMismatch("field CSV '" + path.string() + "': expected " +
                       std::to_string(grid.size()) + " rows, found " +
                       std::to_string(cols.x.size()));
  }
  Array<double> v(grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    if (std::abs(cols.x[j] - grid.point(j)) > x_tol) {
      throw GridMismatch("field CSV '" + path.string() +
                         "': x column does not match the grid");
    }
    v[j] = cols.u[j];
  }
  return Field<double>(grid, std::move(v));
}

}  // namespace chlab::fields
