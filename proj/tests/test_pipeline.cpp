#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "homotop/pipeline.hpp"

using namespace homotop;
namespace fs = std::filesystem;

namespace {

// sine + harmonics + seeded noise, one segment file per channel
void write_synthetic_set(const fs::path& dir, std::uint64_t seed,
                         int channels = 4, int samples = 160) {
  fs::create_directories(dir);
  homotop::SplitMix64 rng(seed);
  for (int c = 0; c < channels; ++c) {
    std::string content;
    const double f1 = 3.0 + rng.uniform01() * 2.0;
    const double f2 = 9.0 + rng.uniform01() * 3.0;
    for (int i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      const double v = 60 * std::sin(2 * std::numbers::pi * f1 * t) +
                       25 * std::sin(2 * std::numbers::pi * f2 * t + 0.7) +
                       6 * rng.normal();
      content += std::to_string(static_cast<int>(std::lround(v))) + "\n";
    }
    char name[16];
    std::snprintf(name, sizeof(name), "ch%03d.txt", c);
    std::ofstream(dir / name) << content;
  }
}

PipelineConfig small_config(const fs::path& root, const std::string& out) {
  PipelineConfig config;
  config.sets = {{"A", (root / "A").string(), "bonn_dir", "columns"},
                 {"B", (root / "B").string(), "bonn_dir", "columns"}};
  config.channels = 3;
  config.seed = 11;
  config.delay = {6, 1};
  config.methods = {"takens3", "isomap", "krr", "fastica", "leim", "tsne"};
  config.target_dim = 3;
  config.isomap_k = 12;
  config.leim_k = 12;
  config.tsne_params.iterations = 60;
  config.tsne_params.perplexity = 12;
  config.rips_max_dim = 3;
  config.rips_max_points = 32;
  config.n_perm = 19;
  config.homology_dims = {1, 2};
  config.threads = 2;
  config.out_dir = (root / out).string();
  return config;
}

}  // namespace

TEST_CASE("takens3 view", "[pipeline]") {
  TimeSeries series;
  series.rate_hz = 10;
  series.label = "t";
  series.samples = {1, 2, 3, 4, 5};

  SECTION("five samples give three 3-d points") {
    const Embedding e = takens3_view(series, 1);
    CHECK(e.coords.rows() == 3);
    CHECK(e.coords.cols() == 3);
    CHECK(e.method == "takens3");
  }

  SECTION("lag 2 on five samples leaves one point") {
    const Embedding e = takens3_view(series, 2);
    CHECK(e.coords.rows() == 1);
  }

  SECTION("constant series warns about degeneracy") {
    TimeSeries flat;
    flat.rate_hz = 1;
    flat.label = "flat";
    flat.samples.assign(10, 2.0);
    Warnings w;
    takens3_view(flat, 1, &w);
    REQUIRE_FALSE(w.empty());
    CHECK(w.front().find("degenerate") != std::string::npos);
  }
}

TEST_CASE("svg rendering", "[pipeline]") {
  const auto dir = testutil::temp_dir("render");

  SECTION("barcode with an essential bar") {
    PersistenceDiagram d;
    d.by_dim = {{{0.0, kInfiniteDeath}}, {{0.5, 1.0}}};
    const auto path = (dir / "barcode.svg").string();
    render_barcode(barcode_of(d, 3.0), path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("#cc0000") != std::string::npos);  // H1 red
  }

  SECTION("diagram scatter") {
    PersistenceDiagram d;
    d.by_dim = {{{0.0, 1.0}}, {{0.25, 0.5}}};
    const auto path = (dir / "diagram.svg").string();
    render_diagram(d, path);
    CHECK(fs::exists(path));
  }

  SECTION("empty payloads annotate, not throw") {
    const auto path = (dir / "empty.svg").string();
    render_barcode(barcode_of(PersistenceDiagram{}, 1.0), path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content.find("empty") != std::string::npos);
    render_scatter3(Eigen::MatrixXd(0, 3), (dir / "e2.svg").string());
    render_distance_series({}, (dir / "e3.svg").string());
    CHECK(fs::exists(dir / "e3.svg"));
  }

  SECTION("scatter3 renders three markers and no polyline") {
    Eigen::MatrixXd pts(3, 3);
    pts << 0, 0, 0, 1, 0, 0, 0, 1, 0.5;
    const auto path = (dir / "scatter.svg").string();
    render_scatter3(pts, path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    size_t circles = 0, from = 0;
    while ((from = content.find("<circle", from)) != std::string::npos) {
      ++circles;
      from += 7;
    }
    CHECK(circles == 3);
    CHECK(content.find("<polyline") == std::string::npos);
  }

  SECTION("distance series renders one polyline per dimension") {
    const auto path = (dir / "series.svg").string();
    render_distance_series(
        {{1, {0.1, 0.3, 0.2}}, {2, {0.05, 0.02, 0.4}}}, path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    size_t polylines = 0, from = 0;
    while ((from = content.find("<polyline", from)) != std::string::npos) {
      ++polylines;
      from += 9;
    }
    CHECK(polylines == 2);
  }
}

TEST_CASE("pipeline config", "[pipeline]") {
  SECTION("json round trip preserves fields") {
    PipelineConfig config;
    config.seed = 99;
    config.channels = 5;
    config.tsne_params.perplexity = 17;
    config.homology_dims = {0, 1};
    config.rips_max_dim = 2;
    const PipelineConfig back = config_from_json(config_to_json(config));
    CHECK(back.seed == 99);
    CHECK(back.channels == 5);
    CHECK(back.tsne_params.perplexity == 17);
    CHECK(back.homology_dims == std::vector<int>{0, 1});
  }

  SECTION("missing input path fails validation before compute") {
    PipelineConfig config;
    config.sets = {{"X", "/nonexistent/path", "bonn_dir", "columns"}};
    CHECK_THROWS_AS(validate(config), validation_error);
  }

  SECTION("homology dims above max_dim-1 are rejected") {
    PipelineConfig config;
    config.sets = {{"X", "/tmp", "bonn_dir", "columns"}};
    config.rips_max_dim = 2;
    config.homology_dims = {2};
    CHECK_THROWS_WITH(validate(config),
                      Catch::Matchers::ContainsSubstring("rips.max_dim"));
  }

  SECTION("HOMOTOP_MAX_POINTS env override") {
    ::setenv("HOMOTOP_MAX_POINTS", "17", 1);
    CHECK(effective_max_points(200) == 17);
    ::unsetenv("HOMOTOP_MAX_POINTS");
    CHECK(effective_max_points(200) == 200);
    ::setenv("HOMOTOP_MAX_POINTS", "bogus", 1);
    CHECK_THROWS_AS(effective_max_points(200), validation_error);
    ::unsetenv("HOMOTOP_MAX_POINTS");
  }
}

TEST_CASE("pipeline end to end on a small synthetic fixture", "[pipeline]") {
  const auto root = testutil::temp_dir("pipeline_e2e");
  write_synthetic_set(root / "A", 1001);
  write_synthetic_set(root / "B", 2002);
  const PipelineConfig config = small_config(root, "out1");

  const RunManifest manifest = run(config);

  SECTION("artifacts exist and hashes match") {
    CHECK_FALSE(manifest.artifacts.empty());
    for (const auto& [rel, hash] : manifest.artifacts) {
      const fs::path path = fs::path(config.out_dir) / rel;
      REQUIRE(fs::exists(path));
      CHECK(sha256_file(path.string()) == hash);
    }
    verify_manifest((fs::path(config.out_dir) / "manifest.json").string());
  }

  SECTION("table shapes: 6 methods, 15 cells; per-set medians present") {
    const DistanceTable table = read_table_csv(
        (fs::path(config.out_dir) / "A" / "ch00" / "table_h1.csv").string());
    CHECK(table.labels.size() == 6);
    int nonzero = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        if (table.values(i, j) >= 0) ++nonzero;
    CHECK(nonzero == 15);
    CHECK(fs::exists(fs::path(config.out_dir) / "A" / "median_table_h2.csv"));
    CHECK(fs::exists(fs::path(config.out_dir) / "wmw_h1.csv"));
    CHECK(fs::exists(fs::path(config.out_dir) / "permutation_takens3_h1.json"));
  }

  SECTION("re-running with the same seed reproduces identical hashes") {
    PipelineConfig again = config;
    again.out_dir = (root / "out2").string();
    again.threads = 1;  // results must not depend on worker count
    const RunManifest second = run(again);
    REQUIRE(second.artifacts.size() == manifest.artifacts.size());
    for (size_t i = 0; i < manifest.artifacts.size(); ++i) {
      CHECK(second.artifacts[i].first == manifest.artifacts[i].first);
      CHECK(second.artifacts[i].second == manifest.artifacts[i].second);
    }
  }

  SECTION("a different seed changes the channel draw") {
    PipelineConfig other = config;
    other.out_dir = (root / "out3").string();
    other.seed = 12;
    const RunManifest third = run(other);
    bool any_difference = false;
    for (size_t i = 0; i < std::min(third.artifacts.size(),
                                    manifest.artifacts.size());
         ++i)
      if (third.artifacts[i].second != manifest.artifacts[i].second)
        any_difference = true;
    CHECK(any_difference);
  }
}

TEST_CASE("pipeline failure carries stage context", "[pipeline]") {
  const auto root = testutil::temp_dir("pipeline_fail");
  write_synthetic_set(root / "A", 3003, 4, 160);
  PipelineConfig config = small_config(root, "out_fail");
  config.sets = {{"A", (root / "A").string(), "bonn_dir", "columns"}};
  config.delay = {64, 3};  // series too short once embedded
  CHECK_THROWS_WITH(run(config),
                    Catch::Matchers::ContainsSubstring("set A") &&
                        Catch::Matchers::ContainsSubstring("ch0"));
}
