#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/complexes.hpp"

namespace homotop {

inline constexpr double kInfiniteDeath =
    std::numeric_limits<double>::infinity();

// Boundary matrix over F2, columns in filtration order. The column of a
// j-simplex lists the indices of its j+1 codimension-1 faces; signs vanish
// mod 2.
struct BoundaryMatrixF2 {
  std::vector<std::vector<std::int32_t>> columns;  // face rows, ascending
  std::vector<std::int8_t> dims;
  std::vector<double> values;
};

inline BoundaryMatrixF2 boundary_matrix(const FilteredComplex& fc) {
  const FiltrationReport report = validate_filtration(fc);
  if (!report.ok)
    throw validation_error("boundary_matrix: " + report.message);
  std::unordered_map<std::uint64_t, std::int32_t> index_of;
  index_of.reserve(fc.simplices.size());
  BoundaryMatrixF2 b;
  b.columns.resize(fc.simplices.size());
  b.dims.resize(fc.simplices.size());
  b.values.resize(fc.simplices.size());
  for (size_t i = 0; i < fc.simplices.size(); ++i) {
    const auto& fs = fc.simplices[i];
    b.dims[i] = static_cast<std::int8_t>(fs.simplex.dim());
    b.values[i] = fs.value;
    if (fs.simplex.count > 1) {
      auto& col = b.columns[i];
      for (int k = 0; k < fs.simplex.count; ++k) {
        const auto it = index_of.find(fs.simplex.face_omitting(k).key());
        if (it == index_of.end())
          throw validation_error("boundary_matrix: missing face");
        col.push_back(it->second);
      }
      std::sort(col.begin(), col.end());
    }
    index_of.emplace(fs.simplex.key(), static_cast<std::int32_t>(i));
  }
  return b;
}

struct PersistencePairs {
  struct Pair {
    std::int32_t creator;    // simplex whose appearance births the class
    std::int32_t destroyer;  // simplex whose appearance kills it
  };
  std::vector<Pair> finite;
  std::vector<std::int32_t> essential;  // unpaired creators
};

namespace detail {

// symmetric difference of two ascending index lists (column addition mod 2)
inline void xor_into(std::vector<std::int32_t>& a,
                     const std::vector<std::int32_t>& b,
                     std::vector<std::int32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(scratch));
  a.swap(scratch);
}

}  // namespace detail

// Standard left-to-right column reduction with lowest-one pivoting. The
// pivot (row, column) pairs are the persistence pairs; zeroed columns whose
// row never becomes a pivot are essential classes.
inline PersistencePairs reduce_and_pair(BoundaryMatrixF2 b) {
  const std::int32_t n = static_cast<std::int32_t>(b.columns.size());
  std::vector<std::int32_t> pivot_owner(static_cast<size_t>(n), -1);
  PersistencePairs result;
  std::vector<std::int32_t> scratch;
  for (std::int32_t j = 0; j < n; ++j) {
    auto& col = b.columns[static_cast<size_t>(j)];
    while (!col.empty()) {
      const std::int32_t low = col.back();
      const std::int32_t owner = pivot_owner[static_cast<size_t>(low)];
      if (owner < 0) {
        pivot_owner[static_cast<size_t>(low)] = j;
        result.finite.push_back({low, j});
        break;
      }
      detail::xor_into(col, b.columns[static_cast<size_t>(owner)], scratch);
    }
  }
  // a zero column births a class; it is essential unless its row was later
  // claimed as some column's pivot (i.e. it appears among the finite pairs)
  for (std::int32_t j = 0; j < n; ++j)
    if (b.columns[static_cast<size_t>(j)].empty() &&
        pivot_owner[static_cast<size_t>(j)] < 0)
      result.essential.push_back(j);
  return result;
}

struct DiagramPoint {
  double birth = 0;
  double death = kInfiniteDeath;

  bool essential() const { return std::isinf(death); }
  double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
  std::vector<std::vector<DiagramPoint>> by_dim;  // index = homology dim

  int max_dim() const { return static_cast<int>(by_dim.size()) - 1; }
  const std::vector<DiagramPoint>& at(int dim) const {
    static const std::vector<DiagramPoint> empty;
    return dim >= 0 && dim < static_cast<int>(by_dim.size())
               ? by_dim[static_cast<size_t>(dim)]
               : empty;
  }
};

// Persistence diagram of a filtered complex. Zero-persistence pairs are
// dropped unless keep_zero. With max_hom_dim above fc.max_dim-1 the top
// dimension cannot die and a warning is issued.
inline PersistenceDiagram persistence_diagram(const FilteredComplex& fc,
                                              int max_hom_dim,
                                              bool keep_zero = false,
                                              Warnings* warnings = nullptr) {
  if (max_hom_dim < 0)
    throw validation_error("persistence_diagram: max_hom_dim >= 0");
  if (max_hom_dim > fc.max_dim - 1)
    warn(warnings,
         "persistence_diagram: deaths in dimension " +
             std::to_string(max_hom_dim) + " need " +
             std::to_string(max_hom_dim + 1) +
             "-simplices; classes there will look essential");
  const BoundaryMatrixF2 b = boundary_matrix(fc);
  const PersistencePairs pairs = reduce_and_pair(b);
  PersistenceDiagram diagram;
  diagram.by_dim.resize(static_cast<size_t>(max_hom_dim) + 1);
  for (const auto& pair : pairs.finite) {
    const int dim = b.dims[static_cast<size_t>(pair.creator)];
    if (dim > max_hom_dim) continue;
    const double birth = b.values[static_cast<size_t>(pair.creator)];
    const double death = b.values[static_cast<size_t>(pair.destroyer)];
    if (!keep_zero && birth == death) continue;
    diagram.by_dim[static_cast<size_t>(dim)].push_back({birth, death});
  }
  for (const std::int32_t creator : pairs.essential) {
    const int dim = b.dims[static_cast<size_t>(creator)];
    if (dim > max_hom_dim) continue;
    diagram.by_dim[static_cast<size_t>(dim)].push_back(
        {b.values[static_cast<size_t>(creator)], kInfiniteDeath});
  }
  for (auto& points : diagram.by_dim)
    std::sort(points.begin(), points.end(),
              [](const DiagramPoint& x, const DiagramPoint& y) {
                return x.birth != y.birth ? x.birth < y.birth
                                          : x.death < y.death;
              });
  return diagram;
}

using BettiVector = std::vector<int>;

inline BettiVector betti_at(const PersistenceDiagram& diagram, double delta) {
  BettiVector betti(diagram.by_dim.size(), 0);
  for (size_t dim = 0; dim < diagram.by_dim.size(); ++dim)
    for (const auto& p : diagram.by_dim[dim])
      if (p.birth <= delta && delta < p.death) ++betti[dim];
  return betti;
}

inline BettiVector betti_at(const FilteredComplex& fc, double delta) {
  return betti_at(persistence_diagram(fc, fc.max_dim, true), delta);
}

inline constexpr size_t kBettiOracleMaxSimplices = 2000;

namespace detail {

// rank over F2 by Gaussian elimination on bitset columns
inline int f2_rank(std::vector<std::vector<std::uint64_t>> cols,
                   size_t row_count) {
  int rank = 0;
  std::vector<long> pivot_of_row(row_count, -1);
  for (size_t j = 0; j < cols.size(); ++j) {
    auto& col = cols[j];
    while (true) {
      long low = -1;
      for (long w = static_cast<long>(col.size()) - 1; w >= 0 && low < 0; --w)
        if (col[static_cast<size_t>(w)])
          low = w * 64 + (63 - std::countl_zero(col[static_cast<size_t>(w)]));
      if (low < 0) break;
      const long owner = pivot_of_row[static_cast<size_t>(low)];
      if (owner < 0) {
        pivot_of_row[static_cast<size_t>(low)] = static_cast<long>(j);
        ++rank;
        break;
      }
      const auto& other = cols[static_cast<size_t>(owner)];
      for (size_t w = 0; w < col.size(); ++w) col[w] ^= other[w];
    }
  }
  return rank;
}

}  // namespace detail

// Independent homology oracle: Betti numbers of the snapshot complex at
// scale delta via ranks of the boundary maps over F2,
// b_j = #j-simplices - rank d_j - rank d_{j+1}.
inline BettiVector betti_bruteforce(const FilteredComplex& fc, double delta) {
  std::vector<FilteredSimplex> snapshot;
  for (const auto& fs : fc.simplices)
    if (fs.value <= delta) snapshot.push_back(fs);
  if (snapshot.size() > kBettiOracleMaxSimplices)
    throw validation_error("betti_bruteforce: oracle scale exceeded (" +
                           std::to_string(snapshot.size()) + " simplices)");
  const int top = fc.max_dim;
  std::vector<std::unordered_map<std::uint64_t, int>> index_by_dim(
      static_cast<size_t>(top) + 1);
  std::vector<int> count_by_dim(static_cast<size_t>(top) + 1, 0);
  for (const auto& fs : snapshot) {
    const int d = fs.simplex.dim();
    index_by_dim[static_cast<size_t>(d)].emplace(
        fs.simplex.key(), count_by_dim[static_cast<size_t>(d)]++);
  }
  std::vector<int> rank_by_dim(static_cast<size_t>(top) + 2, 0);
  for (int d = 1; d <= top; ++d) {
    const size_t rows = static_cast<size_t>(count_by_dim[static_cast<size_t>(d - 1)]);
    const size_t words = (rows + 63) / 64;
    std::vector<std::vector<std::uint64_t>> cols;
    for (const auto& fs : snapshot) {
      if (fs.simplex.dim() != d) continue;
      std::vector<std::uint64_t> col(words, 0);
      for (int k = 0; k < fs.simplex.count; ++k) {
        const int row = index_by_dim[static_cast<size_t>(d - 1)].at(
            fs.simplex.face_omitting(k).key());
        col[static_cast<size_t>(row) / 64] ^= 1ULL << (row % 64);
      }
      cols.push_back(std::move(col));
    }
    rank_by_dim[static_cast<size_t>(d)] = detail::f2_rank(std::move(cols), rows);
  }
  BettiVector betti(static_cast<size_t>(top) + 1, 0);
  for (int d = 0; d <= top; ++d)
    betti[static_cast<size_t>(d)] = count_by_dim[static_cast<size_t>(d)] -
                                    rank_by_dim[static_cast<size_t>(d)] -
                                    rank_by_dim[static_cast<size_t>(d) + 1];
  return betti;
}

struct Barcode {
  struct Interval {
    int dim;
    double birth, death;
    bool essential;
  };
  std::vector<Interval> intervals;  // sorted by (dim, birth, death)
  double cap = 0;
};

// Intervals [birth, death) per dimension; essential classes are drawn to the
// cap and flagged.
inline Barcode barcode_of(const PersistenceDiagram& diagram, double cap) {
  Barcode barcode;
  barcode.cap = cap;
  for (size_t dim = 0; dim < diagram.by_dim.size(); ++dim)
    for (const auto& p : diagram.by_dim[dim]) {
      if (!p.essential() && p.death > cap)
        throw validation_error("barcode_of: cap below max finite death");
      barcode.intervals.push_back({static_cast<int>(dim), p.birth,
                                   p.essential() ? cap : p.death,
                                   p.essential()});
    }
  std::sort(barcode.intervals.begin(), barcode.intervals.end(),
            [](const Barcode::Interval& a, const Barcode::Interval& b) {
              if (a.dim != b.dim) return a.dim < b.dim;
              if (a.birth != b.birth) return a.birth < b.birth;
              return a.death < b.death;
            });
  return barcode;
}

// rendering cap when none is given: 1.05x the max finite death
inline double default_barcode_cap(const PersistenceDiagram& diagram) {
  double max_death = 0;
  for (const auto& points : diagram.by_dim)
    for (const auto& p : points) {
      if (!p.essential()) max_death = std::max(max_death, p.death);
      max_death = std::max(max_death, p.birth);
    }
  return max_death > 0 ? 1.05 * max_death : 1.0;
}

// interchange format: CSV "dim,birth,death" with "inf" for essential classes
inline void write_diagram_csv(const std::string& path,
                              const PersistenceDiagram& diagram) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "dim,birth,death\n";
  for (size_t dim = 0; dim < diagram.by_dim.size(); ++dim)
    for (const auto& p : diagram.by_dim[dim])
      out << dim << ',' << format_double(p.birth) << ','
          << (p.essential() ? "inf" : format_double(p.death)) << '\n';
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline PersistenceDiagram read_diagram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "dim,birth,death")
    throw validation_error("'" + path + "' is not a diagram CSV");
  PersistenceDiagram diagram;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3)
      throw validation_error("bad diagram row " + std::to_string(line_no) +
                             " in '" + path + "'");
    const auto dim = parse_double(cells[0]);
    const auto birth = parse_double(cells[1]);
    const auto death = parse_double(cells[2]);
    if (!dim || !birth || !death || *dim < 0 || *dim != std::floor(*dim))
      throw validation_error("bad diagram row " + std::to_string(line_no) +
                             " in '" + path + "'");
    if (*death < *birth)
      throw validation_error("death before birth at row " +
                             std::to_string(line_no) + " in '" + path + "'");
    const size_t d = static_cast<size_t>(*dim);
    if (diagram.by_dim.size() <= d) diagram.by_dim.resize(d + 1);
    diagram.by_dim[d].push_back({*birth, *death});
  }
  return diagram;
}

}  // namespace homotop
