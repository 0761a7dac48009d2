#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/csv.hpp"
#include "homotop/dimreduce/graph.hpp"

namespace homotop {

// Simplices are capped at dimension 3 (tetrahedra): H2 is the highest
// homology the toolchain reports, and its deaths need 3-simplices.
inline constexpr int kMaxSimplexDim = 3;

struct Simplex {
  std::array<std::int32_t, 4> v{-1, -1, -1, -1};  // strictly increasing
  std::int8_t count = 0;

  int dim() const { return count - 1; }

  static Simplex of(std::initializer_list<std::int32_t> verts) {
    Simplex s;
    for (std::int32_t x : verts) s.push(x);
    return s;
  }
  void push(std::int32_t vertex) {
    if (count == 4) throw validation_error("simplex dimension exceeds 3");
    if (count > 0 && vertex <= v[static_cast<size_t>(count - 1)])
      throw validation_error("simplex vertices must be strictly increasing");
    v[static_cast<size_t>(count++)] = vertex;
  }
  Simplex face_omitting(int k) const {  // codimension-1 face
    Simplex f;
    for (int i = 0; i < count; ++i)
      if (i != k) f.v[static_cast<size_t>(f.count++)] = v[static_cast<size_t>(i)];
    return f;
  }
  std::uint64_t key() const {  // vertices < 2^16, enough for desk scale
    std::uint64_t k = 0;
    for (int i = 0; i < count; ++i)
      k |= (static_cast<std::uint64_t>(v[static_cast<size_t>(i)]) + 1)
           << (16 * i);
    return k;
  }
  bool operator==(const Simplex& o) const {
    return count == o.count && v == o.v;
  }
  bool lex_less(const Simplex& o) const {
    return std::lexicographical_compare(v.begin(), v.begin() + count,
                                        o.v.begin(), o.v.begin() + o.count);
  }
};

struct FilteredSimplex {
  Simplex simplex;
  double value = 0;  // filtration scale at which the simplex enters
};

// filtration order: (value, dimension, lexicographic vertices) -- faces
// always precede cofaces
inline bool filtration_less(const FilteredSimplex& a,
                            const FilteredSimplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.simplex.count != b.simplex.count)
    return a.simplex.count < b.simplex.count;
  return a.simplex.lex_less(b.simplex);
}

struct FilteredComplex {
  std::vector<FilteredSimplex> simplices;  // sorted by filtration_less
  int max_dim = kMaxSimplexDim;
  double max_scale = 0;
  int vertex_count = 0;
};

// default scale bound: half the largest pairwise distance
inline double default_max_scale(const Eigen::MatrixXd& dist) {
  return dist.maxCoeff() / 2.0;
}

// Vietoris-Rips filtration: a simplex enters at the largest pairwise
// distance among its vertices (closed convention) and is kept when that
// value is <= max_scale and its dimension is <= max_dim.
inline FilteredComplex rips_filtration(const Eigen::MatrixXd& dist,
                                       int max_dim, double max_scale) {
  validate_distance_matrix(dist);
  if (max_dim < 0 || max_dim > kMaxSimplexDim)
    throw validation_error("rips_filtration: max_dim must be in {0,1,2,3}");
  if (!(max_scale > 0)) throw validation_error("rips_filtration: max_scale > 0");
  const int n = static_cast<int>(dist.rows());
  FilteredComplex fc;
  fc.max_dim = max_dim;
  fc.max_scale = max_scale;
  fc.vertex_count = n;
  for (int i = 0; i < n; ++i)
    fc.simplices.push_back({Simplex::of({i}), 0.0});
  if (max_dim >= 1) {
    std::vector<std::vector<std::int32_t>> nbr(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (dist(i, j) <= max_scale) {
          fc.simplices.push_back({Simplex::of({i, j}), dist(i, j)});
          nbr[static_cast<size_t>(i)].push_back(j);  // ascending by construction
        }
    if (max_dim >= 2) {
      std::vector<std::int32_t> common, common2;
      for (int i = 0; i < n; ++i) {
        const auto& ni = nbr[static_cast<size_t>(i)];
        for (size_t a = 0; a < ni.size(); ++a) {
          const int j = ni[a];
          const auto& nj = nbr[static_cast<size_t>(j)];
          common.clear();
          std::set_intersection(ni.begin() + static_cast<long>(a) + 1, ni.end(),
                                nj.begin(), nj.end(),
                                std::back_inserter(common));
          for (size_t b = 0; b < common.size(); ++b) {
            const int k = common[b];
            const double tri =
                std::max({dist(i, j), dist(i, k), dist(j, k)});
            fc.simplices.push_back({Simplex::of({i, j, k}), tri});
            if (max_dim >= 3) {
              const auto& nk = nbr[static_cast<size_t>(k)];
              common2.clear();
              std::set_intersection(common.begin() + static_cast<long>(b) + 1,
                                    common.end(), nk.begin(), nk.end(),
                                    std::back_inserter(common2));
              for (int l : common2) {
                const double tet = std::max(
                    {tri, dist(i, l), dist(j, l), dist(k, l)});
                fc.simplices.push_back({Simplex::of({i, j, k, l}), tet});
              }
            }
          }
        }
      }
    }
  }
  std::sort(fc.simplices.begin(), fc.simplices.end(), filtration_less);
  return fc;
}

namespace detail {

// Minimum enclosing ball of up to 4 points in R^d: take the smallest
// circumball over all vertex subsets that contains every point. The
// circumcenter of a subset is solved in the affine hull of the subset.
inline double min_enclosing_radius(const Eigen::MatrixXd& pts) {
  const int k = static_cast<int>(pts.rows());
  if (k == 1) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> sel;
    for (int i = 0; i < k; ++i)
      if (mask & (1 << i)) sel.push_back(i);
    if (sel.size() == 1) continue;  // covered by larger subsets or k==1
    const Eigen::RowVectorXd p0 = pts.row(sel[0]);
    const int m = static_cast<int>(sel.size()) - 1;
    Eigen::MatrixXd basis(m, pts.cols());
    for (int i = 0; i < m; ++i)
      basis.row(i) = pts.row(sel[static_cast<size_t>(i) + 1]) - p0;
    const Eigen::MatrixXd gram = basis * basis.transpose();
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs(i) = 0.5 * gram(i, i);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < m) continue;  // affinely dependent subset
    const Eigen::VectorXd coef = lu.solve(rhs);
    const Eigen::RowVectorXd center = p0 + coef.transpose() * basis;
    double radius = 0;
    for (int i : sel) radius = std::max(radius, (pts.row(i) - center).norm());
    bool contains = true;
    for (int i = 0; contains && i < k; ++i)
      if ((pts.row(i) - center).norm() > radius * (1.0 + 1e-12) + 1e-15)
        contains = false;
    if (contains) best = std::min(best, radius);
  }
  return best;
}

}  // namespace detail

inline constexpr int kCechOracleMaxPoints = 64;

// Cech complex snapshot at scale delta: a simplex is present when the
// minimum enclosing ball of its vertices has radius <= delta/2. Exhaustive
// small-N oracle; the Rips clique test prunes candidates first (any Cech
// simplex is also a Rips simplex at the same scale).
inline std::vector<Simplex> cech_snapshot(const Eigen::MatrixXd& cloud,
                                          double delta, int max_dim) {
  const int n = static_cast<int>(cloud.rows());
  if (n > kCechOracleMaxPoints)
    throw validation_error("cech_snapshot: oracle scale exceeded (N <= " +
                           std::to_string(kCechOracleMaxPoints) + ")");
  if (max_dim < 0 || max_dim > kMaxSimplexDim)
    throw validation_error("cech_snapshot: max_dim must be in {0,1,2,3}");
  if (!(delta >= 0)) throw validation_error("cech_snapshot: delta >= 0");
  const Eigen::MatrixXd dist = pairwise_distances(cloud);
  const FilteredComplex rips = rips_filtration(
      dist, max_dim, std::max(delta, std::numeric_limits<double>::min()));
  std::vector<Simplex> out;
  const double r_max = 0.5 * delta;
  for (const auto& fs : rips.simplices) {
    if (fs.simplex.count <= 2) {
      // vertex: radius 0; edge: radius = half the pairwise distance
      if (fs.value <= delta) out.push_back(fs.simplex);
      continue;
    }
    Eigen::MatrixXd pts(fs.simplex.count, cloud.cols());
    for (int i = 0; i < fs.simplex.count; ++i)
      pts.row(i) = cloud.row(fs.simplex.v[static_cast<size_t>(i)]);
    if (detail::min_enclosing_radius(pts) <= r_max * (1.0 + 1e-9))
      out.push_back(fs.simplex);
  }
  return out;
}

struct FiltrationReport {
  bool ok = true;
  std::string message;
};

// closure (every codim-1 face present) + monotonicity (face value <= coface
// value) + sortedness in filtration order
inline FiltrationReport validate_filtration(const FilteredComplex& fc) {
  std::unordered_map<std::uint64_t, double> value_of;
  value_of.reserve(fc.simplices.size());
  for (size_t i = 0; i < fc.simplices.size(); ++i) {
    if (i > 0 && !filtration_less(fc.simplices[i - 1], fc.simplices[i]))
      return {false, "simplices out of filtration order at index " +
                         std::to_string(i)};
    const auto& fs = fc.simplices[i];
    for (int k = 0; k < fs.simplex.count && fs.simplex.count > 1; ++k) {
      const Simplex face = fs.simplex.face_omitting(k);
      const auto it = value_of.find(face.key());
      if (it == value_of.end())
        return {false, "closure violation: face of simplex at index " +
                           std::to_string(i) + " is missing"};
      if (it->second > fs.value)
        return {false, "monotonicity violation: face enters at " +
                           format_double(it->second) + " after coface at " +
                           format_double(fs.value)};
    }
    value_of.emplace(fs.simplex.key(), fs.value);
  }
  return {};
}

// Deterministic maxmin landmarking: start from vertex 0, repeatedly add the
// point farthest from the chosen set (ties to the lower index).
inline std::vector<int> maxmin_landmarks(const Eigen::MatrixXd& dist,
                                         int count) {
  const int n = static_cast<int>(dist.rows());
  if (count < 1) throw validation_error("maxmin_landmarks: count >= 1");
  if (count >= n) {
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    return all;
  }
  std::vector<int> chosen{0};
  std::vector<double> nearest(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) nearest[static_cast<size_t>(i)] = dist(0, i);
  while (static_cast<int>(chosen.size()) < count) {
    int far = 0;
    for (int i = 1; i < n; ++i)
      if (nearest[static_cast<size_t>(i)] > nearest[static_cast<size_t>(far)])
        far = i;
    chosen.push_back(far);
    for (int i = 0; i < n; ++i)
      nearest[static_cast<size_t>(i)] =
          std::min(nearest[static_cast<size_t>(i)], dist(far, i));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// text format: one simplex per line, "value dim v0 v1 ...", filtration order
inline void write_filtration(const std::string& path,
                             const FilteredComplex& fc) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  for (const auto& fs : fc.simplices) {
    out << format_double(fs.value) << ' ' << fs.simplex.dim();
    for (int i = 0; i < fs.simplex.count; ++i)
      out << ' ' << fs.simplex.v[static_cast<size_t>(i)];
    out << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline FilteredComplex read_filtration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  FilteredComplex fc;
  fc.max_dim = 0;
  double max_value = 0;
  int max_vertex = -1;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    double value;
    int dim;
    if (!(ss >> value >> dim))
      throw validation_error("bad filtration line " + std::to_string(line_no) +
                             " in '" + path + "'");
    Simplex s;
    for (int i = 0; i <= dim; ++i) {
      int v;
      if (!(ss >> v))
        throw validation_error("bad filtration line " +
                               std::to_string(line_no) + " in '" + path + "'");
      s.push(v);
      max_vertex = std::max(max_vertex, v);
    }
    fc.max_dim = std::max(fc.max_dim, dim);
    max_value = std::max(max_value, value);
    fc.simplices.push_back({s, value});
  }
  if (fc.simplices.empty())
    throw validation_error("empty filtration in '" + path + "'");
  fc.max_scale = max_value;
  fc.vertex_count = max_vertex + 1;
  const FiltrationReport report = validate_filtration(fc);
  if (!report.ok)
    throw validation_error("invalid filtration in '" + path +
                           "': " + report.message);
  return fc;
}

}  // namespace homotop
