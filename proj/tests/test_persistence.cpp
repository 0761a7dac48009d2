#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "helpers.hpp"
#include "homotop/persistence.hpp"

using namespace homotop;

namespace {

FilteredComplex hollow_triangle() {
  FilteredComplex fc;
  fc.max_dim = 1;
  fc.max_scale = 1;
  fc.vertex_count = 3;
  fc.simplices = {{Simplex::of({0}), 0},    {Simplex::of({1}), 0},
                  {Simplex::of({2}), 0},    {Simplex::of({0, 1}), 1},
                  {Simplex::of({0, 2}), 1}, {Simplex::of({1, 2}), 1}};
  std::sort(fc.simplices.begin(), fc.simplices.end(), filtration_less);
  return fc;
}

FilteredComplex filled_triangle() {
  FilteredComplex fc = hollow_triangle();
  fc.max_dim = 2;
  fc.max_scale = 2;
  fc.simplices.push_back({Simplex::of({0, 1, 2}), 2});
  return fc;
}

// full boundary of a tetrahedron (no solid 3-cell), everything at scale 0/1
FilteredComplex tetrahedron_boundary() {
  FilteredComplex fc;
  fc.max_dim = 2;
  fc.max_scale = 1;
  fc.vertex_count = 4;
  for (int i = 0; i < 4; ++i) fc.simplices.push_back({Simplex::of({i}), 0});
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      fc.simplices.push_back({Simplex::of({i, j}), 1});
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        fc.simplices.push_back({Simplex::of({i, j, k}), 1});
  std::sort(fc.simplices.begin(), fc.simplices.end(), filtration_less);
  return fc;
}

FilteredComplex solid_tetrahedron() {
  FilteredComplex fc = tetrahedron_boundary();
  fc.max_dim = 3;
  fc.simplices.push_back({Simplex::of({0, 1, 2, 3}), 1});
  return fc;
}

std::vector<double> filtration_values(const FilteredComplex& fc) {
  std::set<double> values;
  for (const auto& fs : fc.simplices) values.insert(fs.value);
  return {values.begin(), values.end()};
}

}  // namespace

TEST_CASE("boundary matrix", "[persistence]") {
  SECTION("an edge's column holds its two vertices") {
    FilteredComplex fc;
    fc.max_dim = 1;
    fc.vertex_count = 2;
    fc.simplices = {{Simplex::of({0}), 0},
                    {Simplex::of({1}), 0},
                    {Simplex::of({0, 1}), 1}};
    const BoundaryMatrixF2 b = boundary_matrix(fc);
    CHECK(b.columns[0].empty());
    CHECK(b.columns[1].empty());
    CHECK(b.columns[2] == std::vector<std::int32_t>{0, 1});
  }

  SECTION("a 2-simplex's column holds its three edges") {
    const BoundaryMatrixF2 b = boundary_matrix(filled_triangle());
    const auto& tri_col = b.columns.back();
    REQUIRE(tri_col.size() == 3);
    for (std::int32_t row : tri_col)
      CHECK(b.dims[static_cast<size_t>(row)] == 1);
  }

  SECTION("boundary of boundary vanishes mod 2 on a solid tetrahedron") {
    const FilteredComplex fc = solid_tetrahedron();
    const BoundaryMatrixF2 b = boundary_matrix(fc);
    for (size_t j = 0; j < b.columns.size(); ++j) {
      std::set<std::int32_t> grandfaces;  // xor accumulation
      for (std::int32_t face : b.columns[j])
        for (std::int32_t gf : b.columns[static_cast<size_t>(face)]) {
          if (grandfaces.count(gf)) grandfaces.erase(gf);
          else grandfaces.insert(gf);
        }
      CHECK(grandfaces.empty());
    }
  }

  SECTION("non-closed complexes are rejected") {
    FilteredComplex fc;
    fc.max_dim = 1;
    fc.vertex_count = 2;
    fc.simplices = {{Simplex::of({0}), 0}, {Simplex::of({0, 1}), 1}};
    CHECK_THROWS_AS(boundary_matrix(fc), validation_error);
  }
}

TEST_CASE("reduction pairs simple complexes", "[persistence]") {
  SECTION("two vertices and an edge: one merge") {
    FilteredComplex fc;
    fc.max_dim = 1;
    fc.vertex_count = 2;
    fc.simplices = {{Simplex::of({0}), 0},
                    {Simplex::of({1}), 0},
                    {Simplex::of({0, 1}), 1}};
    const PersistenceDiagram d = persistence_diagram(fc, 1);
    REQUIRE(d.at(0).size() == 2);
    CHECK(d.at(0)[0].birth == 0);
    CHECK(d.at(0)[0].death == 1);       // the merged component
    CHECK(d.at(0)[1].essential());      // the surviving component
    CHECK(d.at(1).empty());
  }

  SECTION("hollow triangle: essential 1-cycle born at 1") {
    const PersistenceDiagram d = persistence_diagram(hollow_triangle(), 1);
    REQUIRE(d.at(1).size() == 1);
    CHECK(d.at(1)[0].birth == 1);
    CHECK(d.at(1)[0].essential());
    const BettiVector oracle = betti_bruteforce(hollow_triangle(), 1.0);
    CHECK(oracle == BettiVector{1, 1});
  }

  SECTION("filled triangle: the cycle dies at 2") {
    const PersistenceDiagram d = persistence_diagram(filled_triangle(), 1);
    REQUIRE(d.at(1).size() == 1);
    CHECK(d.at(1)[0].birth == 1);
    CHECK(d.at(1)[0].death == 2);
    const BettiVector at_1 = betti_bruteforce(filled_triangle(), 1.0);
    const BettiVector at_2 = betti_bruteforce(filled_triangle(), 2.0);
    CHECK(at_1[1] == 1);
    CHECK(at_2[1] == 0);
  }
}

TEST_CASE("betti numbers at fixed scales", "[persistence]") {
  SECTION("hollow triangle at scale 1 is a circle") {
    const BettiVector b = betti_at(hollow_triangle(), 1.0);
    CHECK(b[0] == 1);
    CHECK(b[1] == 1);
  }

  SECTION("filled triangle at scale 2 is a disk") {
    const BettiVector b = betti_at(filled_triangle(), 2.0);
    CHECK(b[0] == 1);
    CHECK(b[1] == 0);
  }

  SECTION("two disjoint edges") {
    FilteredComplex fc;
    fc.max_dim = 1;
    fc.vertex_count = 4;
    fc.simplices = {{Simplex::of({0}), 0},    {Simplex::of({1}), 0},
                    {Simplex::of({2}), 0},    {Simplex::of({3}), 0},
                    {Simplex::of({0, 1}), 1}, {Simplex::of({2, 3}), 1}};
    std::sort(fc.simplices.begin(), fc.simplices.end(), filtration_less);
    const BettiVector b = betti_at(fc, 1.0);
    CHECK(b[0] == 2);
    CHECK(b[1] == 0);
  }
}

TEST_CASE("brute-force homology oracle", "[persistence]") {
  SECTION("boundary of a tetrahedron is a 2-sphere") {
    CHECK(betti_bruteforce(tetrahedron_boundary(), 1.0) ==
          BettiVector{1, 0, 1});
  }

  SECTION("solid tetrahedron is contractible") {
    CHECK(betti_bruteforce(solid_tetrahedron(), 1.0) ==
          BettiVector{1, 0, 0, 0});
  }

  SECTION("isolated vertices count components") {
    FilteredComplex fc;
    fc.max_dim = 0;
    fc.vertex_count = 5;
    for (int i = 0; i < 5; ++i) fc.simplices.push_back({Simplex::of({i}), 0});
    CHECK(betti_bruteforce(fc, 0.0) == BettiVector{5});
  }

  SECTION("oracle scale is enforced") {
    const Eigen::MatrixXd cloud = testutil::random_cloud(30, 3, 1);
    const FilteredComplex fc =
        rips_filtration(pairwise_distances(cloud), 3, 1e18);
    CHECK_THROWS_WITH(betti_bruteforce(fc, 1e18),
                      Catch::Matchers::ContainsSubstring("oracle"));
  }
}

TEST_CASE("reduction agrees with the rank oracle on random clouds",
          "[persistence]") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int n = 4 + static_cast<int>(seed % 5);
    const Eigen::MatrixXd cloud = testutil::random_cloud(n, 3, seed);
    const Eigen::MatrixXd dist = pairwise_distances(cloud);
    const FilteredComplex fc = rips_filtration(dist, 3, 1e18);
    const PersistenceDiagram diagram = persistence_diagram(fc, 3, true);
    for (double delta : filtration_values(fc)) {
      const BettiVector fast = betti_at(diagram, delta);
      const BettiVector slow = betti_bruteforce(fc, delta);
      REQUIRE(fast == slow);
    }
  }
}

TEST_CASE("every simplex is a creator or a destroyer exactly once",
          "[persistence]") {
  const Eigen::MatrixXd cloud = testutil::random_cloud(10, 3, 77);
  const Eigen::MatrixXd dist = pairwise_distances(cloud);
  const FilteredComplex fc = rips_filtration(dist, 3, 1e18);
  const BoundaryMatrixF2 b = boundary_matrix(fc);
  const PersistencePairs pairs = reduce_and_pair(b);
  std::vector<int> role(fc.simplices.size(), 0);
  for (const auto& pair : pairs.finite) {
    ++role[static_cast<size_t>(pair.creator)];
    ++role[static_cast<size_t>(pair.destroyer)];
  }
  for (std::int32_t creator : pairs.essential)
    ++role[static_cast<size_t>(creator)];
  for (int r : role) CHECK(r == 1);
  // per-dimension bookkeeping: creators of dim j + destroyers of dim j
  // account for every j-simplex
  std::vector<int> simplices_by_dim(4, 0), creators(4, 0), destroyers(4, 0),
      essentials(4, 0);
  for (const auto& fs : fc.simplices)
    ++simplices_by_dim[static_cast<size_t>(fs.simplex.dim())];
  for (const auto& pair : pairs.finite) {
    ++creators[static_cast<size_t>(b.dims[static_cast<size_t>(pair.creator)])];
    ++destroyers[static_cast<size_t>(b.dims[static_cast<size_t>(pair.destroyer)])];
  }
  for (std::int32_t creator : pairs.essential)
    ++essentials[static_cast<size_t>(b.dims[static_cast<size_t>(creator)])];
  for (int d = 0; d <= 3; ++d)
    CHECK(creators[static_cast<size_t>(d)] + destroyers[static_cast<size_t>(d)] +
              essentials[static_cast<size_t>(d)] ==
          simplices_by_dim[static_cast<size_t>(d)]);
}

TEST_CASE("known topology: circle", "[persistence]") {
  const Eigen::MatrixXd cloud = testutil::circle_cloud(100);
  const Eigen::MatrixXd dist = pairwise_distances(cloud);
  const FilteredComplex fc = rips_filtration(dist, 2, 1.8);
  const PersistenceDiagram d = persistence_diagram(fc, 1);
  int essential_h0 = 0;
  for (const auto& p : d.at(0))
    if (p.essential()) ++essential_h0;
  CHECK(essential_h0 == 1);
  REQUIRE(d.at(1).size() >= 1);
  // exactly one long-lived loop
  int long_lived = 0;
  for (const auto& p : d.at(1))
    if (!p.essential() && p.death / p.birth > 3.0) ++long_lived;
  CHECK(long_lived == 1);
}

TEST_CASE("degenerate diagrams", "[persistence]") {
  SECTION("a single point") {
    FilteredComplex fc;
    fc.max_dim = 0;
    fc.vertex_count = 1;
    fc.simplices = {{Simplex::of({0}), 0}};
    const PersistenceDiagram d = persistence_diagram(fc, 1);
    REQUIRE(d.at(0).size() == 1);
    CHECK(d.at(0)[0].birth == 0);
    CHECK(d.at(0)[0].essential());
    CHECK(d.at(1).empty());
  }

  SECTION("square split into two triangles has no lasting cycle") {
    // unit square with one diagonal: sides at 1, diagonal and both filled
    // triangles at sqrt(2)
    const double rt2 = std::sqrt(2.0);
    FilteredComplex fc;
    fc.max_dim = 2;
    fc.max_scale = rt2;
    fc.vertex_count = 4;
    for (int i = 0; i < 4; ++i) fc.simplices.push_back({Simplex::of({i}), 0});
    fc.simplices.push_back({Simplex::of({0, 1}), 1});
    fc.simplices.push_back({Simplex::of({1, 2}), 1});
    fc.simplices.push_back({Simplex::of({2, 3}), 1});
    fc.simplices.push_back({Simplex::of({0, 3}), 1});
    fc.simplices.push_back({Simplex::of({0, 2}), rt2});
    fc.simplices.push_back({Simplex::of({0, 1, 2}), rt2});
    fc.simplices.push_back({Simplex::of({0, 2, 3}), rt2});
    std::sort(fc.simplices.begin(), fc.simplices.end(), filtration_less);
    CHECK(betti_at(fc, rt2) == BettiVector{1, 0, 0});
    CHECK(betti_bruteforce(fc, rt2) == BettiVector{1, 0, 0});
  }

  SECTION("warning when the top dimension cannot die") {
    Warnings w;
    persistence_diagram(hollow_triangle(), 1, false, &w);
    CHECK_FALSE(w.empty());
  }
}

TEST_CASE("diagram stability under small perturbations", "[persistence]") {
  // perturbations bounded by eps in the euclidean norm (hence also in the
  // sup norm); rips diagrams may move by at most 2 eps in bottleneck
  // distance, checked empirically in test_metrics.cpp where the metric
  // lives. Here: filtration values move by at most 2 eps.
  const double eps = 0.01;
  const Eigen::MatrixXd cloud = testutil::random_cloud(30, 3, 5);
  homotop::SplitMix64 rng(6);
  Eigen::MatrixXd moved = cloud;
  for (int i = 0; i < moved.rows(); ++i) {
    Eigen::RowVector3d step;
    step << rng.normal(), rng.normal(), rng.normal();
    step *= eps * rng.uniform01() / step.norm();
    moved.row(i) += step;
  }
  const Eigen::MatrixXd da = pairwise_distances(cloud);
  const Eigen::MatrixXd db = pairwise_distances(moved);
  CHECK((da - db).cwiseAbs().maxCoeff() <= 2 * eps);
}

TEST_CASE("determinism: identical complexes give identical diagrams",
          "[persistence]") {
  const Eigen::MatrixXd cloud = testutil::random_cloud(25, 3, 9);
  const Eigen::MatrixXd dist = pairwise_distances(cloud);
  const FilteredComplex fc = rips_filtration(dist, 2, default_max_scale(dist));
  const PersistenceDiagram a = persistence_diagram(fc, 2);
  const PersistenceDiagram b = persistence_diagram(fc, 2);
  REQUIRE(a.by_dim.size() == b.by_dim.size());
  for (size_t dim = 0; dim < a.by_dim.size(); ++dim) {
    REQUIRE(a.by_dim[dim].size() == b.by_dim[dim].size());
    for (size_t i = 0; i < a.by_dim[dim].size(); ++i) {
      CHECK(std::memcmp(&a.by_dim[dim][i].birth, &b.by_dim[dim][i].birth,
                        sizeof(double)) == 0);
      CHECK(std::memcmp(&a.by_dim[dim][i].death, &b.by_dim[dim][i].death,
                        sizeof(double)) == 0);
    }
  }
}

TEST_CASE("barcodes", "[persistence]") {
  SECTION("an essential class is drawn to the cap and flagged") {
    PersistenceDiagram d;
    d.by_dim = {{{0.0, kInfiniteDeath}}};
    const Barcode barcode = barcode_of(d, 3.0);
    REQUIRE(barcode.intervals.size() == 1);
    CHECK(barcode.intervals[0].death == 3.0);
    CHECK(barcode.intervals[0].essential);
  }

  SECTION("empty diagram gives an empty barcode") {
    CHECK(barcode_of(PersistenceDiagram{}, 1.0).intervals.empty());
  }

  SECTION("intervals sort by (dim, birth, death)") {
    PersistenceDiagram d;
    d.by_dim = {{{1.0, 2.0}, {0.0, 3.0}}};
    const Barcode barcode = barcode_of(d, 3.0);
    REQUIRE(barcode.intervals.size() == 2);
    CHECK(barcode.intervals[0].birth == 0.0);
    CHECK(barcode.intervals[1].birth == 1.0);
  }
}

TEST_CASE("diagram CSV round trip", "[persistence]") {
  const auto dir = testutil::temp_dir("diagram");
  PersistenceDiagram d;
  d.by_dim = {{{0.0, kInfiniteDeath}, {0.0, 0.25}},
              {{0.5, 1.5}},
              {{0.75, 0.875}}};
  const auto path = (dir / "diagram.csv").string();
  write_diagram_csv(path, d);
  const PersistenceDiagram back = read_diagram_csv(path);
  REQUIRE(back.by_dim.size() == 3);
  CHECK(back.at(0)[0].essential());
  CHECK(back.at(0)[1].death == 0.25);
  CHECK(back.at(1)[0].birth == 0.5);
  CHECK(back.at(2)[0].death == 0.875);
}
