#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/csv.hpp"
#include "homotop/persistence.hpp"

namespace homotop {

namespace detail {

inline double sup_cost(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

// sup-norm distance from a point to the diagonal {birth == death}
inline double diag_cost(const DiagramPoint& a) {
  return 0.5 * (a.death - a.birth);
}

struct SplitDiagram {
  std::vector<DiagramPoint> finite;
  std::vector<double> essential_births;  // sorted
};

inline SplitDiagram split_essential(const std::vector<DiagramPoint>& points) {
  SplitDiagram s;
  for (const auto& p : points) {
    if (p.essential()) s.essential_births.push_back(p.birth);
    else s.finite.push_back(p);
  }
  std::sort(s.essential_births.begin(), s.essential_births.end());
  return s;
}

// Kuhn's augmenting-path bipartite matching; returns true when a perfect
// matching of the left side exists.
class BipartiteMatcher {
 public:
  explicit BipartiteMatcher(int left, int right)
      : adj_(static_cast<size_t>(left)),
        match_right_(static_cast<size_t>(right), -1) {}

  void add_edge(int l, int r) { adj_[static_cast<size_t>(l)].push_back(r); }

  bool perfect() {
    int matched = 0;
    for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
      visited_.assign(match_right_.size(), false);
      if (augment(l)) ++matched;
    }
    return matched == static_cast<int>(adj_.size());
  }

 private:
  bool augment(int l) {
    for (int r : adj_[static_cast<size_t>(l)]) {
      if (visited_[static_cast<size_t>(r)]) continue;
      visited_[static_cast<size_t>(r)] = true;
      if (match_right_[static_cast<size_t>(r)] < 0 ||
          augment(match_right_[static_cast<size_t>(r)])) {
        match_right_[static_cast<size_t>(r)] = l;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> match_right_;
  std::vector<bool> visited_;
};

// is there a perfect matching using only pair costs <= t?
inline bool bottleneck_feasible(const std::vector<DiagramPoint>& x,
                                const std::vector<DiagramPoint>& y, double t) {
  const int nx = static_cast<int>(x.size());
  const int ny = static_cast<int>(y.size());
  // left: x points then y-ghosts; right: y points then x-ghosts
  BipartiteMatcher matcher(nx + ny, ny + nx);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j)
      if (sup_cost(x[static_cast<size_t>(i)], y[static_cast<size_t>(j)]) <= t)
        matcher.add_edge(i, j);
    if (diag_cost(x[static_cast<size_t>(i)]) <= t)
      matcher.add_edge(i, ny + i);  // its own diagonal slot
  }
  for (int j = 0; j < ny; ++j) {
    if (diag_cost(y[static_cast<size_t>(j)]) <= t)
      matcher.add_edge(nx + j, j);
    for (int i = 0; i < nx; ++i)
      matcher.add_edge(nx + j, ny + i);  // ghost-ghost, always free
  }
  return matcher.perfect();
}

// Exact square assignment by shortest augmenting paths with potentials
// (Jonker-Volgenant style), O(n^3).
inline double solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return 0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0),
      v(static_cast<size_t>(n) + 1, 0);
  std::vector<int> match(static_cast<size_t>(n) + 1, 0),
      way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<size_t>(n) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = match[static_cast<size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] -
                           v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  double total = 0;
  for (int j = 1; j <= n; ++j)
    total += cost(match[static_cast<size_t>(j)] - 1, j - 1);
  return total;
}

// deterministic total order on diagram slices; distances canonicalize their
// argument order with this so that d(x,y) and d(y,x) run the exact same
// floating-point computation
inline bool slice_less(const std::vector<DiagramPoint>& a,
                       const std::vector<DiagramPoint>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  auto key = [](const std::vector<DiagramPoint>& s) {
    std::vector<std::pair<double, double>> k;
    k.reserve(s.size());
    for (const auto& p : s) k.emplace_back(p.birth, p.death);
    std::sort(k.begin(), k.end());
    return k;
  };
  return key(a) < key(b);
}

// matching cost of the essential classes: counts must agree, then sorted
// births pair up
inline bool essential_cost(const SplitDiagram& x, const SplitDiagram& y,
                           double p, double* sum, double* max_cost) {
  if (x.essential_births.size() != y.essential_births.size()) return false;
  *sum = 0;
  *max_cost = 0;
  for (size_t i = 0; i < x.essential_births.size(); ++i) {
    const double c = std::abs(x.essential_births[i] - y.essential_births[i]);
    *sum += std::pow(c, p);
    *max_cost = std::max(*max_cost, c);
  }
  return true;
}

}  // namespace detail

// Bottleneck distance between two diagram slices, exact: binary search over
// the sorted candidate costs (all point-point sup costs plus all diagonal
// costs) with bipartite feasibility checks. Essential classes are compared
// separately by sorted births; mismatched counts yield +infinity.
inline double bottleneck_distance(const std::vector<DiagramPoint>& xs,
                                  const std::vector<DiagramPoint>& ys,
                                  bool* essential_mismatch = nullptr) {
  if (essential_mismatch) *essential_mismatch = false;
  const detail::SplitDiagram x = detail::split_essential(xs);
  const detail::SplitDiagram y = detail::split_essential(ys);
  double ess_sum = 0, ess_max = 0;
  if (!detail::essential_cost(x, y, 1.0, &ess_sum, &ess_max)) {
    if (essential_mismatch) *essential_mismatch = true;
    return std::numeric_limits<double>::infinity();
  }
  std::vector<double> candidates{0.0};
  for (const auto& a : x.finite) {
    candidates.push_back(detail::diag_cost(a));
    for (const auto& b : y.finite)
      candidates.push_back(detail::sup_cost(a, b));
  }
  for (const auto& b : y.finite) candidates.push_back(detail::diag_cost(b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (detail::bottleneck_feasible(x.finite, y.finite, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::max(candidates[lo], ess_max);
}

// p-Wasserstein distance (p >= 1) as the exact optimal-assignment cost
// sum |x - eta(x)|_inf^p over the diagonal-augmented problem. Following the
// source convention the raw sum is returned; with root=true the p-th root
// is taken (the conventional metric).
inline double wasserstein_distance(const std::vector<DiagramPoint>& xs,
                                   const std::vector<DiagramPoint>& ys,
                                   double p, bool root = false,
                                   bool* essential_mismatch = nullptr) {
  if (!(p >= 1)) throw validation_error("wasserstein_distance: p >= 1");
  if (essential_mismatch) *essential_mismatch = false;
  if (detail::slice_less(ys, xs))
    return wasserstein_distance(ys, xs, p, root, essential_mismatch);
  const detail::SplitDiagram x = detail::split_essential(xs);
  const detail::SplitDiagram y = detail::split_essential(ys);
  double ess_sum = 0, ess_max = 0;
  if (!detail::essential_cost(x, y, p, &ess_sum, &ess_max)) {
    if (essential_mismatch) *essential_mismatch = true;
    return std::numeric_limits<double>::infinity();
  }
  const int nx = static_cast<int>(x.finite.size());
  const int ny = static_cast<int>(y.finite.size());
  const int n = nx + ny;
  double total = ess_sum;
  if (n > 0) {
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i < nx && j < ny)
          cost(i, j) = std::pow(
              detail::sup_cost(x.finite[static_cast<size_t>(i)],
                               y.finite[static_cast<size_t>(j)]),
              p);
        else if (i < nx)
          cost(i, j) =
              std::pow(detail::diag_cost(x.finite[static_cast<size_t>(i)]), p);
        else if (j < ny)
          cost(i, j) =
              std::pow(detail::diag_cost(y.finite[static_cast<size_t>(j)]), p);
        else
          cost(i, j) = 0;
      }
    total += detail::solve_assignment(cost);
  }
  return root ? std::pow(total, 1.0 / p) : total;
}

inline constexpr size_t kMatchingOracleMaxPoints = 8;

namespace detail {

// exhaustive recursion over all augmented matchings: each x point matches an
// unused y point or its diagonal; leftover y points go to the diagonal
template <typename Visit>
inline void enumerate_matchings(const std::vector<DiagramPoint>& x,
                                const std::vector<DiagramPoint>& y, size_t i,
                                std::vector<bool>& used, double sum_p,
                                double max_c, double p, Visit&& visit) {
  if (i == x.size()) {
    double total_sum = sum_p;
    double total_max = max_c;
    for (size_t j = 0; j < y.size(); ++j)
      if (!used[j]) {
        const double c = diag_cost(y[j]);
        total_sum += std::pow(c, p);
        total_max = std::max(total_max, c);
      }
    visit(total_sum, total_max);
    return;
  }
  const double dc = diag_cost(x[i]);
  enumerate_matchings(x, y, i + 1, used, sum_p + std::pow(dc, p),
                      std::max(max_c, dc), p, visit);
  for (size_t j = 0; j < y.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    const double c = sup_cost(x[i], y[j]);
    enumerate_matchings(x, y, i + 1, used, sum_p + std::pow(c, p),
                        std::max(max_c, c), p, visit);
    used[j] = false;
  }
}

}  // namespace detail

// factorial brute-force oracles, small instances only
inline double bottleneck_bruteforce(const std::vector<DiagramPoint>& xs,
                                    const std::vector<DiagramPoint>& ys) {
  const detail::SplitDiagram x = detail::split_essential(xs);
  const detail::SplitDiagram y = detail::split_essential(ys);
  double ess_sum = 0, ess_max = 0;
  if (!detail::essential_cost(x, y, 1.0, &ess_sum, &ess_max))
    return std::numeric_limits<double>::infinity();
  if (x.finite.size() > kMatchingOracleMaxPoints ||
      y.finite.size() > kMatchingOracleMaxPoints)
    throw validation_error("bottleneck_bruteforce: oracle scale exceeded");
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> used(y.finite.size(), false);
  detail::enumerate_matchings(x.finite, y.finite, 0, used, 0, 0, 1.0,
                              [&](double, double max_c) {
                                best = std::min(best, max_c);
                              });
  return std::max(best, ess_max);
}

inline double wasserstein_bruteforce(const std::vector<DiagramPoint>& xs,
                                     const std::vector<DiagramPoint>& ys,
                                     double p, bool root = false) {
  const detail::SplitDiagram x = detail::split_essential(xs);
  const detail::SplitDiagram y = detail::split_essential(ys);
  double ess_sum = 0, ess_max = 0;
  if (!detail::essential_cost(x, y, p, &ess_sum, &ess_max))
    return std::numeric_limits<double>::infinity();
  if (x.finite.size() > kMatchingOracleMaxPoints ||
      y.finite.size() > kMatchingOracleMaxPoints)
    throw validation_error("wasserstein_bruteforce: oracle scale exceeded");
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> used(y.finite.size(), false);
  detail::enumerate_matchings(x.finite, y.finite, 0, used, 0, 0, p,
                              [&](double sum_p, double) {
                                best = std::min(best, sum_p);
                              });
  best += ess_sum;
  return root ? std::pow(best, 1.0 / p) : best;
}

struct MetricSpec {
  enum class Kind { kBottleneck, kWasserstein };
  Kind kind = Kind::kBottleneck;
  double p = 2.0;     // wasserstein only
  bool root = false;  // wasserstein only

  double operator()(const std::vector<DiagramPoint>& x,
                    const std::vector<DiagramPoint>& y) const {
    return kind == Kind::kBottleneck ? bottleneck_distance(x, y)
                                     : wasserstein_distance(x, y, p, root);
  }
  std::string name() const {
    if (kind == Kind::kBottleneck) return "bottleneck";
    return "wasserstein_p" + format_double(p) + (root ? "_root" : "");
  }
};

struct DistanceTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;  // symmetric, zero diagonal
  int dim = 0;             // homology dimension the slice came from
};

inline DistanceTable pairwise_table(
    const std::vector<std::pair<std::string, PersistenceDiagram>>& diagrams,
    int dim, const MetricSpec& metric) {
  if (diagrams.size() < 2)
    throw validation_error("pairwise_table: need >= 2 diagrams");
  DistanceTable table;
  table.dim = dim;
  const int n = static_cast<int>(diagrams.size());
  table.values.setZero(n, n);
  for (const auto& [label, diagram] : diagrams) table.labels.push_back(label);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = metric(diagrams[static_cast<size_t>(i)].second.at(dim),
                              diagrams[static_cast<size_t>(j)].second.at(dim));
      table.values(i, j) = d;
      table.values(j, i) = d;
    }
  return table;
}

// CSV with header row/column labels
inline void write_table_csv(const std::string& path,
                            const DistanceTable& table) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "label";
  for (const auto& l : table.labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    out << table.labels[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j)
      out << ',' << format_double(table.values(i, j));
    out << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

// lower-triangular pretty text
inline std::string format_table_text(const DistanceTable& table) {
  const int n = static_cast<int>(table.labels.size());
  size_t width = 10;
  for (const auto& l : table.labels) width = std::max(width, l.size() + 2);
  std::string out;
  auto pad = [&](const std::string& s) {
    std::string cell = s;
    cell.resize(width, ' ');
    return cell;
  };
  out += pad("H" + std::to_string(table.dim));
  for (int j = 0; j < n; ++j) out += pad(table.labels[static_cast<size_t>(j)]);
  out += '\n';
  for (int i = 0; i < n; ++i) {
    out += pad(table.labels[static_cast<size_t>(i)]);
    for (int j = 0; j < i; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.7f", table.values(i, j));
      out += pad(buf);
    }
    out += '\n';
  }
  return out;
}

inline DistanceTable read_table_csv(const std::string& path) {
  const CsvMatrix raw = [&] {
    // the first CSV column is the label column; strip it by hand
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::string line;
    CsvMatrix m;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto cells = split_csv_line(line);
      if (first) {
        first = false;
        for (size_t c = 1; c < cells.size(); ++c)
          m.header.push_back(trim(cells[c]));
        continue;
      }
      std::vector<double> row;
      for (size_t c = 1; c < cells.size(); ++c) {
        const auto v = parse_double(cells[c]);
        if (!v)
          throw validation_error("bad table cell in '" + path + "'");
        row.push_back(*v);
      }
      rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() != m.header.size())
      throw validation_error("'" + path + "' is not a square distance table");
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size())
        throw validation_error("'" + path + "' is not square");
      for (size_t c = 0; c < rows.size(); ++c)
        m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            rows[r][c];
    }
    return m;
  }();
  DistanceTable table;
  table.labels = raw.header;
  table.values = raw.values;
  return table;
}

}  // namespace homotop
