#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "homotop/dimreduce/graph.hpp"

using namespace homotop;

namespace {

Eigen::MatrixXd collinear_points() {
  Eigen::MatrixXd pts(3, 1);
  pts << 0, 1, 3;
  return pts;
}

}  // namespace

TEST_CASE("knn graph construction", "[dimreduce][graph]") {
  SECTION("three collinear points, K=1, unbounded epsilon") {
    const WeightedGraph g = knn_graph(collinear_points(), {1});
    REQUIRE(g.n == 3);
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].u == 0); CHECK(g.edges[0].v == 1);
    CHECK(g.edges[0].w == Catch::Approx(1.0));
    CHECK(g.edges[1].u == 1); CHECK(g.edges[1].v == 2);
    CHECK(g.edges[1].w == Catch::Approx(2.0));
  }

  SECTION("two points are always joined") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0, 0, 3, 4;
    const WeightedGraph g = knn_graph(pts, {1});
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].w == Catch::Approx(5.0));
  }

  SECTION("oversized K clamps with a warning") {
    Warnings w;
    const WeightedGraph g = knn_graph(collinear_points(), {5}, &w);
    CHECK(g.edges.size() == 3);  // complete graph on 3 vertices
    REQUIRE_FALSE(w.empty());
    CHECK(w.front().find("clamped") != std::string::npos);
  }

  SECTION("epsilon can isolate a vertex, with a warning") {
    Warnings w;
    const WeightedGraph g = knn_graph(collinear_points(), {1, 0.5}, &w);
    CHECK(g.edges.empty());
    CHECK_FALSE(w.empty());
  }
}

TEST_CASE("graph geodesics", "[dimreduce][graph]") {
  SECTION("path graph accumulates weights") {
    WeightedGraph g;
    g.n = 3;
    g.edges = {{0, 1, 1.0}, {1, 2, 2.0}};
    const GeodesicResult geo = graph_geodesics(g);
    CHECK(geo.distances(0, 2) == Catch::Approx(3.0));
    CHECK(geo.distances(2, 0) == Catch::Approx(3.0));
  }

  SECTION("shortest path beats a heavy direct edge") {
    WeightedGraph g;
    g.n = 3;
    g.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 5.0}};
    const GeodesicResult geo = graph_geodesics(g);
    CHECK(geo.distances(0, 2) == Catch::Approx(2.0));
  }

  SECTION("disconnected graph reports component sizes") {
    WeightedGraph g;
    g.n = 4;
    g.edges = {{0, 1, 1.0}, {2, 3, 1.0}};
    CHECK_THROWS_WITH(graph_geodesics(g),
                      Catch::Matchers::ContainsSubstring("2 components (2,2)"));
  }

  SECTION("largest-component mode keeps the biggest piece") {
    WeightedGraph g;
    g.n = 5;
    g.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}};
    const GeodesicResult geo = graph_geodesics(g, true);
    CHECK(geo.vertices == std::vector<int>{0, 1, 2});
    CHECK(geo.distances.rows() == 3);
  }

  SECTION("geodesic output satisfies the distance-matrix invariants") {
    const Eigen::MatrixXd cloud = testutil::random_cloud(20, 3, 5);
    const WeightedGraph g = knn_graph(cloud, {6});
    const GeodesicResult geo = graph_geodesics(g, true);
    validate_distance_matrix(geo.distances);
    const auto& d = geo.distances;
    for (int i = 0; i < d.rows(); ++i)
      for (int j = 0; j < d.rows(); ++j)
        for (int k = 0; k < d.rows(); ++k)
          CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
  }
}
