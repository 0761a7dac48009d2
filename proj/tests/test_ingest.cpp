#include <catch2/catch_amalgamated.hpp>
#include <cstring>
#include <filesystem>

#include "helpers.hpp"
#include "homotop/ingest.hpp"

using namespace homotop;
namespace fs = std::filesystem;

TEST_CASE("bonn segment loading", "[ingest]") {
  const auto dir = testutil::temp_dir("bonn");

  SECTION("full-length segment at the default rate") {
    std::string content;
    for (int i = 0; i < 4097; ++i) content += std::to_string(i % 300 - 150) + "\n";
    testutil::write_text(dir / "Z001.txt", content);
    const TimeSeries ts = load_bonn_segment((dir / "Z001.txt").string());
    CHECK(ts.samples.size() == 4097);
    CHECK(ts.rate_hz == Catch::Approx(173.61));
    CHECK(ts.label == "Z001");
  }

  SECTION("line order becomes sample order") {
    testutil::write_text(dir / "small.txt", "1\n-2\n3");
    const TimeSeries ts = load_bonn_segment((dir / "small.txt").string());
    CHECK(ts.samples == std::vector<double>{1, -2, 3});
  }

  SECTION("blank lines and trailing whitespace are skipped") {
    testutil::write_text(dir / "blanks.txt", "1\n\n  \n2\n3\n\n");
    CHECK(load_bonn_segment((dir / "blanks.txt").string()).samples ==
          std::vector<double>{1, 2, 3});
  }

  SECTION("empty file reports zero samples") {
    testutil::write_text(dir / "empty.txt", "");
    CHECK_THROWS_WITH(load_bonn_segment((dir / "empty.txt").string()),
                      Catch::Matchers::ContainsSubstring("zero samples"));
  }

  SECTION("non-numeric content reports the line number") {
    testutil::write_text(dir / "bad.txt", "1\n2\noops\n4\n");
    CHECK_THROWS_WITH(load_bonn_segment((dir / "bad.txt").string()),
                      Catch::Matchers::ContainsSubstring("line 3"));
  }

  SECTION("missing file is an io error") {
    CHECK_THROWS_AS(load_bonn_segment((dir / "nope.txt").string()), io_error);
  }
}

TEST_CASE("csv matrix loading", "[ingest]") {
  const auto dir = testutil::temp_dir("csv");

  SECTION("columns are channels") {
    testutil::write_text(dir / "m.csv", "1,2,3,4\n5,6,7,8\n9,10,11,12\n");
    const ChannelSet set = load_csv_matrix(
        (dir / "m.csv").string(), Orientation::kColumnsAreChannels, 100.0);
    REQUIRE(set.channels.size() == 4);
    CHECK(set.channels[0].samples == std::vector<double>{1, 5, 9});
    CHECK(set.channels[3].samples == std::vector<double>{4, 8, 12});
    CHECK(set.channels[1].label == "ch1");
  }

  SECTION("rows are channels") {
    testutil::write_text(dir / "m.csv", "1,2,3\n4,5,6\n");
    const ChannelSet set = load_csv_matrix(
        (dir / "m.csv").string(), Orientation::kRowsAreChannels, 50.0);
    REQUIRE(set.channels.size() == 2);
    CHECK(set.channels[1].samples == std::vector<double>{4, 5, 6});
  }

  SECTION("header row names the channels") {
    testutil::write_text(dir / "h.csv", "left,right\n0.5,1.5\n2.5,3.5\n");
    const ChannelSet set = load_csv_matrix(
        (dir / "h.csv").string(), Orientation::kColumnsAreChannels, 10.0);
    REQUIRE(set.channels.size() == 2);
    CHECK(set.channels[0].label == "left");
    CHECK(set.channels[1].samples == std::vector<double>{1.5, 3.5});
  }

  SECTION("1x1 matrix") {
    testutil::write_text(dir / "one.csv", "42\n");
    const ChannelSet set = load_csv_matrix(
        (dir / "one.csv").string(), Orientation::kColumnsAreChannels, 1.0);
    REQUIRE(set.channels.size() == 1);
    CHECK(set.channels[0].samples == std::vector<double>{42});
  }

  SECTION("ragged rows are rejected with the row number") {
    testutil::write_text(dir / "ragged.csv", "1,2,3\n4,5,6,7\n");
    CHECK_THROWS_WITH(load_csv_matrix((dir / "ragged.csv").string(),
                                      Orientation::kColumnsAreChannels, 1.0),
                      Catch::Matchers::ContainsSubstring("ragged row 2"));
  }

  SECTION("non-numeric cell and empty matrix are rejected") {
    testutil::write_text(dir / "bad.csv", "1,2\n3,x\n");
    CHECK_THROWS_WITH(load_csv_matrix((dir / "bad.csv").string(),
                                      Orientation::kColumnsAreChannels, 1.0),
                      Catch::Matchers::ContainsSubstring("non-numeric"));
    testutil::write_text(dir / "empty.csv", "\n\n");
    CHECK_THROWS_AS(load_csv_matrix((dir / "empty.csv").string(),
                                    Orientation::kColumnsAreChannels, 1.0),
                    validation_error);
  }
}

TEST_CASE("channel set round trip is bit exact", "[ingest]") {
  const auto dir = testutil::temp_dir("roundtrip");
  ChannelSet set;
  set.set_label = "demo";
  homotop::SplitMix64 rng(99);
  for (int c = 0; c < 3; ++c) {
    TimeSeries ts;
    ts.rate_hz = 173.61;
    ts.label = "ch" + std::to_string(c);
    for (int i = 0; i < 50; ++i)
      ts.samples.push_back((rng.uniform01() - 0.5) * 1e3);
    for (int i = 0; i < 10; ++i)
      ts.samples.push_back(static_cast<double>(static_cast<int>(rng.below(10000)) - 5000));
    set.channels.push_back(ts);
  }
  const auto path = (dir / "set.csv").string();
  write_channelset_csv(path, set);
  const ChannelSet back =
      load_csv_matrix(path, Orientation::kColumnsAreChannels, 173.61);
  REQUIRE(back.channels.size() == set.channels.size());
  for (size_t c = 0; c < set.channels.size(); ++c) {
    REQUIRE(back.channels[c].samples.size() == set.channels[c].samples.size());
    CHECK(std::memcmp(back.channels[c].samples.data(),
                      set.channels[c].samples.data(),
                      sizeof(double) * set.channels[c].samples.size()) == 0);
    CHECK(back.channels[c].label == set.channels[c].label);
  }
}

TEST_CASE("channel selection is deterministic and seeded", "[ingest]") {
  ChannelSet set;
  set.set_label = "A";
  for (int c = 0; c < 100; ++c) {
    TimeSeries ts;
    ts.label = "ch" + std::to_string(c);
    ts.samples = {static_cast<double>(c)};
    set.channels.push_back(ts);
  }

  SECTION("15 of 100 with a fixed seed is reproducible and distinct") {
    const ChannelSet a = select_channels(set, 15, 7);
    const ChannelSet b = select_channels(set, 15, 7);
    REQUIRE(a.channels.size() == 15);
    for (size_t i = 0; i < 15; ++i)
      CHECK(a.channels[i].label == b.channels[i].label);
    std::set<std::string> labels;
    for (const auto& ch : a.channels) labels.insert(ch.label);
    CHECK(labels.size() == 15);
  }

  SECTION("different seeds give a different draw") {
    const ChannelSet a = select_channels(set, 15, 7);
    const ChannelSet c = select_channels(set, 15, 8);
    bool same = true;
    for (size_t i = 0; i < 15; ++i)
      if (a.channels[i].label != c.channels[i].label) same = false;
    CHECK_FALSE(same);
  }

  SECTION("selecting everything returns the canonical order") {
    const ChannelSet all = select_channels(set, 100, 3);
    for (int c = 0; c < 100; ++c)
      CHECK(all.channels[static_cast<size_t>(c)].label ==
            "ch" + std::to_string(c));
  }

  SECTION("overdraw is rejected") {
    ChannelSet small;
    small.channels.assign(set.channels.begin(), set.channels.begin() + 15);
    CHECK_THROWS_AS(select_channels(small, 16, 1), validation_error);
  }
}
