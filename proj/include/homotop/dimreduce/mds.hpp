#pragma once

#include <Eigen/Dense>
#include <string>

#include "homotop/common.hpp"
#include "homotop/dimreduce/graph.hpp"
#include "homotop/dimreduce/types.hpp"

namespace homotop {

namespace detail {

// reproducible eigenvector orientation: first non-negligible entry positive
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace detail

// Classical (Torgerson) multidimensional scaling: double-center the squared
// distances, B = -1/2 J (D.D) J, and embed with the top-m eigenpairs scaled
// by sqrt(eigenvalue). Negative eigenvalues are truncated to zero; missing
// positive directions pad with zero columns.
inline Embedding classical_mds(const Eigen::MatrixXd& dist, int m,
                               Warnings* warnings = nullptr) {
  validate_distance_matrix(dist);
  const Eigen::Index n = dist.rows();
  if (m < 1) throw validation_error("classical_mds: target dim must be >= 1");
  const Eigen::MatrixXd d2 = dist.array().square();
  Eigen::MatrixXd b = -0.5 * d2;
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const double total_mean = b.mean();
  b.colwise() -= row_mean;
  b.rowwise() -= row_mean.transpose();
  b.array() += total_mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success)
    throw compute_error("classical_mds: eigendecomposition failed");
  Embedding out;
  out.method = "mds";
  out.params = {{"m", m}};
  out.coords.setZero(n, m);
  int padded = 0, truncated = 0;
  for (int c = 0; c < m; ++c) {
    const Eigen::Index k = n - 1 - c;  // eigenvalues ascending; walk from top
    if (k < 0) {
      ++padded;
      continue;
    }
    const double lambda = eig.eigenvalues()(k);
    if (lambda <= 0) {
      if (lambda < 0) ++truncated;
      ++padded;
      continue;  // column stays zero
    }
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    detail::fix_sign(v);
    out.coords.col(c) = v * std::sqrt(lambda);
  }
  if (truncated > 0)
    warn(warnings, "classical_mds: " + std::to_string(truncated) +
                       " negative eigenvalue(s) truncated to zero");
  if (padded > 0)
    warn(warnings, "classical_mds: " + std::to_string(padded) +
                       " coordinate(s) padded with zeros (not enough positive "
                       "eigenvalues)");
  require_finite(out.coords, "mds embedding");
  return out;
}

// Isomap: neighborhood graph -> graph geodesics -> classical MDS. With
// largest_component the embedding covers only the kept vertices and `rows`
// records their original indices; by default disconnection is an error.
inline Embedding isomap(const Eigen::MatrixXd& cloud,
                        const NeighborhoodParams& nbr, int m,
                        bool largest_component = false,
                        Warnings* warnings = nullptr) {
  const WeightedGraph g = knn_graph(cloud, nbr, warnings);
  const GeodesicResult geo = graph_geodesics(g, largest_component);
  if (static_cast<int>(geo.vertices.size()) < g.n)
    warn(warnings, "isomap: restricted to largest component (" +
                       std::to_string(geo.vertices.size()) + " of " +
                       std::to_string(g.n) + " points)");
  Embedding out = classical_mds(geo.distances, m, warnings);
  out.method = "isomap";
  out.params = {{"m", m},
                {"k", nbr.k},
                {"epsilon", std::isfinite(nbr.epsilon) ? nbr.epsilon : -1.0},
                {"largest_component", largest_component}};
  if (static_cast<int>(geo.vertices.size()) < g.n) out.rows = geo.vertices;
  return out;
}

}  // namespace homotop
