#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homotop/common.hpp"

namespace homotop {

// Shortest decimal form that round-trips a double bit-for-bit.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == x) {
    // try to shorten; %.17g is always exact but often longer than needed
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
      std::sscanf(shorter, "%lf", &back);
      if (back == x) return shorter;
    }
  }
  return buf;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (std::isspace(static_cast<unsigned char>(s[b])))) ++b;
  while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::optional<double> parse_double(std::string_view cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  if (t == "inf" || t == "+inf")
    return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

struct CsvMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> header;  // empty when the file had no header row
};

// Rectangular numeric CSV with an optional single header row. Row numbers in
// error messages are 1-based and count data rows only.
inline CsvMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  bool first = true;
  size_t width = 0;
  size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (first) {
      first = false;
      bool numeric = true;
      for (const auto& c : cells)
        if (!parse_double(c)) numeric = false;
      if (!numeric) {
        for (const auto& c : cells) header.push_back(trim(c));
        width = cells.size();
        continue;
      }
      width = cells.size();
    }
    ++data_row;
    if (cells.size() != width)
      throw validation_error("ragged row " + std::to_string(data_row) +
                             " in '" + path + "': expected " +
                             std::to_string(width) + " cells, got " +
                             std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v)
        throw validation_error("non-numeric cell at row " +
                               std::to_string(data_row) + ", column " +
                               std::to_string(c + 1) + " in '" + path + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw validation_error("empty matrix in '" + path + "'");
  CsvMatrix out;
  out.header = std::move(header);
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < width; ++c)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  return out;
}

inline void write_matrix_csv(const std::string& path,
                             const Eigen::MatrixXd& m,
                             const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace homotop
