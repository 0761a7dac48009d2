#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/dimreduce/types.hpp"

namespace homotop {

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (points.row(i) - points.row(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

inline void validate_distance_matrix(const Eigen::MatrixXd& d,
                                     double tol = 1e-9) {
  if (d.rows() != d.cols())
    throw validation_error("distance matrix must be square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0)
      throw validation_error("distance matrix has nonzero diagonal at " +
                             std::to_string(i));
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0)
        throw validation_error("distance matrix entry (" + std::to_string(i) +
                               "," + std::to_string(j) + ") invalid");
      if (std::abs(d(i, j) - d(j, i)) > tol)
        throw validation_error("distance matrix not symmetric at (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ")");
    }
  }
}

// epsilon-K nearest neighbor graph: j is linked to i when j is among the K
// nearest of i and within the epsilon ball; the edge set is the symmetric
// union. Distance ties break toward the lower index.
inline WeightedGraph knn_graph(const Eigen::MatrixXd& cloud,
                               const NeighborhoodParams& params,
                               Warnings* warnings = nullptr) {
  const int n = static_cast<int>(cloud.rows());
  if (n < 2) throw validation_error("knn_graph needs at least 2 points");
  int k = params.k;
  if (k < 1) throw validation_error("knn_graph needs K >= 1");
  if (k > n - 1) {
    warn(warnings, "K=" + std::to_string(k) + " clamped to " +
                       std::to_string(n - 1) + " for " + std::to_string(n) +
                       " points");
    k = n - 1;
  }
  const Eigen::MatrixXd d = pairwise_distances(cloud);
  std::vector<std::pair<double, int>> order(static_cast<size_t>(n - 1));
  std::vector<std::vector<bool>> linked(static_cast<size_t>(n),
                                        std::vector<bool>(static_cast<size_t>(n), false));
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) order.emplace_back(d(i, j), j);
    std::sort(order.begin(), order.end());
    int taken = 0;
    for (const auto& [dist, j] : order) {
      if (taken == k || dist > params.epsilon) break;
      linked[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
      ++taken;
    }
    if (taken == 0)
      warn(warnings, "vertex " + std::to_string(i) +
                         " has no neighbors within epsilon; graph may be "
                         "disconnected");
  }
  WeightedGraph g;
  g.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (linked[static_cast<size_t>(i)][static_cast<size_t>(j)] ||
          linked[static_cast<size_t>(j)][static_cast<size_t>(i)])
        g.edges.push_back({i, j, d(i, j)});
  return g;
}

namespace detail {

inline std::vector<std::vector<std::pair<int, double>>> adjacency(
    const WeightedGraph& g) {
  std::vector<std::vector<std::pair<int, double>>> adj(
      static_cast<size_t>(g.n));
  for (const auto& e : g.edges) {
    adj[static_cast<size_t>(e.u)].emplace_back(e.v, e.w);
    adj[static_cast<size_t>(e.v)].emplace_back(e.u, e.w);
  }
  return adj;
}

}  // namespace detail

// connected component label per vertex, labels in discovery order
inline std::vector<int> component_labels(const WeightedGraph& g) {
  const auto adj = detail::adjacency(g);
  std::vector<int> label(static_cast<size_t>(g.n), -1);
  int next = 0;
  for (int start = 0; start < g.n; ++start) {
    if (label[static_cast<size_t>(start)] != -1) continue;
    std::queue<int> q;
    q.push(start);
    label[static_cast<size_t>(start)] = next;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& [v, w] : adj[static_cast<size_t>(u)])
        if (label[static_cast<size_t>(v)] == -1) {
          label[static_cast<size_t>(v)] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return label;
}

inline std::vector<int> component_sizes(const WeightedGraph& g) {
  const auto label = component_labels(g);
  std::vector<int> sizes;
  for (int l : label) {
    if (l >= static_cast<int>(sizes.size()))
      sizes.resize(static_cast<size_t>(l) + 1, 0);
    ++sizes[static_cast<size_t>(l)];
  }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

inline std::string describe_components(const std::vector<int>& sizes) {
  std::string s = std::to_string(sizes.size()) + " components (";
  for (size_t i = 0; i < sizes.size(); ++i)
    s += (i ? "," : "") + std::to_string(sizes[i]);
  return s + ")";
}

struct GeodesicResult {
  Eigen::MatrixXd distances;  // all-pairs shortest paths over kept vertices
  std::vector<int> vertices;  // kept vertex ids, ascending
};

// All-pairs weighted shortest paths (Dijkstra per source). A disconnected
// graph is an error unless the caller opts into the largest component.
inline GeodesicResult graph_geodesics(const WeightedGraph& g,
                                      bool largest_component = false) {
  const auto labels = component_labels(g);
  const auto sizes = component_sizes(g);
  std::vector<int> kept;
  if (sizes.size() > 1) {
    if (!largest_component)
      throw validation_error("graph has " + describe_components(sizes));
    // keep the first component of maximal size (deterministic)
    std::vector<int> count(sizes.size(), 0);
    for (int l : labels) ++count[static_cast<size_t>(l)];
    int best = 0;
    for (size_t l = 0; l < count.size(); ++l)
      if (count[l] > count[static_cast<size_t>(best)]) best = static_cast<int>(l);
    for (int v = 0; v < g.n; ++v)
      if (labels[static_cast<size_t>(v)] == best) kept.push_back(v);
  } else {
    kept.resize(static_cast<size_t>(g.n));
    for (int v = 0; v < g.n; ++v) kept[static_cast<size_t>(v)] = v;
  }
  std::vector<int> dense(static_cast<size_t>(g.n), -1);
  for (size_t i = 0; i < kept.size(); ++i) dense[static_cast<size_t>(kept[i])] = static_cast<int>(i);
  const auto adj = detail::adjacency(g);
  const int m = static_cast<int>(kept.size());
  GeodesicResult result;
  result.vertices = kept;
  result.distances.setConstant(m, m, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  for (int si = 0; si < m; ++si) {
    const int source = kept[static_cast<size_t>(si)];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    auto row = result.distances.row(si);
    row(si) = 0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      const int ui = dense[static_cast<size_t>(u)];
      if (du > row(ui)) continue;
      for (const auto& [v, w] : adj[static_cast<size_t>(u)]) {
        const int vi = dense[static_cast<size_t>(v)];
        if (vi < 0) continue;
        const double alt = du + w;
        if (alt < row(vi)) {
          row(vi) = alt;
          heap.emplace(alt, v);
        }
      }
    }
  }
  // enforce exact symmetry (heap order can differ per source only in ulps)
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double v = std::min(result.distances(i, j), result.distances(j, i));
      result.distances(i, j) = v;
      result.distances(j, i) = v;
    }
  return result;
}

}  // namespace homotop
