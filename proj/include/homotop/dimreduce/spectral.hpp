#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "homotop/common.hpp"
#include "homotop/dimreduce/graph.hpp"
#include "homotop/dimreduce/mds.hpp"
#include "homotop/dimreduce/types.hpp"

namespace homotop {

// bandwidth heuristic: the median edge length of the neighborhood graph
inline double median_edge_length(const WeightedGraph& g) {
  if (g.edges.empty()) return 1.0;
  std::vector<double> lengths;
  lengths.reserve(g.edges.size());
  for (const auto& e : g.edges) lengths.push_back(e.w);
  std::sort(lengths.begin(), lengths.end());
  const size_t n = lengths.size();
  const double median =
      n % 2 ? lengths[n / 2] : 0.5 * (lengths[n / 2 - 1] + lengths[n / 2]);
  return median > 0 ? median : 1.0;
}

// Gaussian adjacency over the symmetrized neighborhood graph:
// w_ij = exp(-|v_i - v_j|^2 / (2 sigma^2)) on edges, 0 elsewhere.
inline Eigen::MatrixXd leim_adjacency(const Eigen::MatrixXd& cloud,
                                      const WeightedGraph& g, double sigma) {
  if (!(sigma > 0)) throw validation_error("laplacian_eigenmaps: sigma > 0");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const auto& e : g.edges) {
    const double d2 = (cloud.row(e.u) - cloud.row(e.v)).squaredNorm();
    const double wij = std::exp(-d2 / (2.0 * sigma * sigma));
    w(e.u, e.v) = wij;
    w(e.v, e.u) = wij;
  }
  return w;
}

inline Eigen::MatrixXd graph_laplacian(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd l = -w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) l(i, i) = w.row(i).sum();
  return l;
}

// Laplacian eigenmaps: solve L y = mu Lambda y and take the eigenvectors for
// the m smallest nonzero eigenvalues (the constant eigenvector is skipped).
// The returned Y minimizes sum_ij w_ij |y_i - y_j|^2 under the usual
// Lambda-orthogonality constraints. sigma <= 0 selects the median-edge
// bandwidth.
inline Embedding laplacian_eigenmaps(const Eigen::MatrixXd& cloud,
                                     const NeighborhoodParams& nbr,
                                     double sigma, int m,
                                     Warnings* warnings = nullptr) {
  const int n = static_cast<int>(cloud.rows());
  if (m < 1 || m > n - 1)
    throw validation_error("laplacian_eigenmaps: need 1 <= m <= N-1");
  const WeightedGraph g = knn_graph(cloud, nbr, warnings);
  const auto sizes = component_sizes(g);
  if (sizes.size() > 1)
    throw validation_error(
        "laplacian_eigenmaps: zero eigenvalue has multiplicity " +
        std::to_string(sizes.size()) + "; graph has " +
        describe_components(sizes));
  if (sigma <= 0) sigma = median_edge_length(g);
  const Eigen::MatrixXd w = leim_adjacency(cloud, g, sigma);
  const Eigen::MatrixXd l = graph_laplacian(w);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) lambda(i, i) = w.row(i).sum();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(l, lambda);
  if (eig.info() != Eigen::Success)
    throw compute_error("laplacian_eigenmaps: generalized eigensolve failed");
  Embedding out;
  out.method = "leim";
  out.params = {{"m", m}, {"k", nbr.k}, {"sigma", sigma}};
  out.coords.resize(n, m);
  for (int c = 0; c < m; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(c + 1);  // skip constant
    detail::fix_sign(v);
    out.coords.col(c) = v;
  }
  require_finite(out.coords, "leim embedding");
  return out;
}

// sum_{i<j} w_ij |y_i - y_j|^2; equals tr(Y^T L Y) for L = Lambda - W
inline double leim_objective(const Eigen::MatrixXd& w,
                             const Eigen::MatrixXd& y) {
  double total = 0;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = i + 1; j < w.cols(); ++j)
      total += w(i, j) * (y.row(i) - y.row(j)).squaredNorm();
  return total;
}

}  // namespace homotop
