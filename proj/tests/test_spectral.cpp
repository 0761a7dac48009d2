#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "homotop/dimreduce/spectral.hpp"

using namespace homotop;

namespace {

// two tight blobs of five points; K=5 forces one bridge per point
Eigen::MatrixXd two_blobs() {
  Eigen::MatrixXd pts(10, 2);
  homotop::SplitMix64 rng(4);
  for (int i = 0; i < 5; ++i) {
    pts(i, 0) = 0.1 * rng.uniform01();
    pts(i, 1) = 0.1 * rng.uniform01();
    pts(i + 5, 0) = 2.0 + 0.1 * rng.uniform01();
    pts(i + 5, 1) = 0.1 * rng.uniform01();
  }
  return pts;
}

}  // namespace

TEST_CASE("laplacian eigenmaps", "[dimreduce][spectral]") {
  SECTION("the first nontrivial eigenvector separates two clusters by sign") {
    const Embedding e = laplacian_eigenmaps(two_blobs(), {5}, 1.0, 1);
    REQUIRE(e.coords.rows() == 10);
    const double s0 = e.coords(0, 0) > 0 ? 1.0 : -1.0;
    for (int i = 0; i < 5; ++i) CHECK(e.coords(i, 0) * s0 > 0);
    for (int i = 5; i < 10; ++i) CHECK(e.coords(i, 0) * s0 < 0);
  }

  SECTION("laplacian row sums are exactly zero") {
    const Eigen::MatrixXd cloud = testutil::random_cloud(12, 3, 9);
    const WeightedGraph g = knn_graph(cloud, {4});
    const Eigen::MatrixXd w = leim_adjacency(cloud, g, 0.7);
    const Eigen::MatrixXd l = graph_laplacian(w);
    for (int i = 0; i < l.rows(); ++i)
      CHECK(l.row(i).sum() == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("objective equals tr(Y^T L Y) on the returned embedding") {
    const Eigen::MatrixXd cloud = testutil::random_cloud(15, 3, 21);
    const WeightedGraph g = knn_graph(cloud, {5});
    const Eigen::MatrixXd w = leim_adjacency(cloud, g, 1.0);
    const Eigen::MatrixXd l = graph_laplacian(w);
    const Embedding e = laplacian_eigenmaps(cloud, {5}, 1.0, 3);
    const double direct = leim_objective(w, e.coords);
    const double via_trace = (e.coords.transpose() * l * e.coords).trace();
    CHECK(direct == Catch::Approx(via_trace).margin(1e-9));
  }

  SECTION("huge sigma flattens the weights of a symmetric triangle") {
    Eigen::MatrixXd pts(3, 2);
    pts << 0, 0, 1, 0, 0.5, std::sqrt(3) / 2;
    const WeightedGraph g = knn_graph(pts, {2});
    const Eigen::MatrixXd w = leim_adjacency(pts, g, 1e9);
    const Eigen::MatrixXd l = graph_laplacian(w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l);
    // complete symmetric graph: the two nontrivial eigenvalues coincide
    CHECK(eig.eigenvalues()(1) == Catch::Approx(eig.eigenvalues()(2)).margin(1e-6));
  }

  SECTION("disconnected graph is an error naming the components") {
    Eigen::MatrixXd pts(4, 1);
    pts << 0, 0.1, 50, 50.1;
    CHECK_THROWS_WITH(laplacian_eigenmaps(pts, {1}, 1.0, 1),
                      Catch::Matchers::ContainsSubstring("components"));
  }
}
