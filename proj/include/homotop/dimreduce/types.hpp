#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/csv.hpp"
#include "homotop/rng.hpp"

namespace homotop {

struct NeighborhoodParams {
  int k = 10;
  double epsilon = std::numeric_limits<double>::infinity();  // ball radius
};

struct WeightedGraph {
  struct Edge {
    int u, v;  // u < v
    double w;  // >= 0
  };
  int n = 0;
  std::vector<Edge> edges;
};

// A low-dimensional representation of a point cloud, with enough provenance
// to reproduce it: the method tag and the parameters it ran with.
struct Embedding {
  Eigen::MatrixXd coords;  // one row per (kept) input point
  std::string method;
  nlohmann::json params = nlohmann::json::object();
  std::vector<int> rows;  // original row index per coord row; empty = identity
};

inline std::string param_hash(const nlohmann::json& params) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(params.dump())));
  return buf;
}

// CSV layout: header "method,param_hash,c1..cm", one row per point. The
// parameter JSON itself goes to a sidecar next to the CSV.
inline void write_embedding_csv(const std::string& path, const Embedding& e) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "method,param_hash";
  for (Eigen::Index c = 0; c < e.coords.cols(); ++c) out << ",c" << (c + 1);
  out << '\n';
  const std::string hash = param_hash(e.params);
  for (Eigen::Index r = 0; r < e.coords.rows(); ++r) {
    out << e.method << ',' << hash;
    for (Eigen::Index c = 0; c < e.coords.cols(); ++c)
      out << ',' << format_double(e.coords(r, c));
    out << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline void write_embedding_sidecar(const std::string& path,
                                    const Embedding& e) {
  nlohmann::json j;
  j["method"] = e.method;
  j["param_hash"] = param_hash(e.params);
  j["params"] = e.params;
  j["rows"] = e.rows;
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Embedding read_embedding_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw validation_error("empty embedding file '" + path + "'");
  std::vector<std::vector<double>> rows;
  Embedding e;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < 3)
      throw validation_error("short row " + std::to_string(line_no) + " in '" +
                             path + "'");
    if (e.method.empty()) e.method = trim(cells[0]);
    std::vector<double> row;
    for (size_t c = 2; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v)
        throw validation_error("non-numeric coordinate at line " +
                               std::to_string(line_no) + " in '" + path + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw validation_error("ragged row " + std::to_string(line_no) +
                             " in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw validation_error("embedding file '" + path + "' has no points");
  e.coords.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows.front().size(); ++c)
      e.coords(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  return e;
}

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite())
    throw compute_error(std::string(what) + " contains non-finite entries");
}

}  // namespace homotop
