#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/csv.hpp"
#include "homotop/rng.hpp"

namespace homotop {

// Sampling rate of the Bonn EEG segment files.
inline constexpr double kBonnRateHz = 173.61;

struct TimeSeries {
  std::vector<double> samples;  // microvolts, in file order
  double rate_hz = kBonnRateHz;
  std::string label;

  int length() const { return static_cast<int>(samples.size()); }
};

struct ChannelSet {
  std::vector<TimeSeries> channels;
  std::string set_label;
};

inline void validate(const TimeSeries& ts) {
  if (ts.samples.empty())
    throw validation_error("time series '" + ts.label + "' has zero samples");
  if (!(ts.rate_hz > 0))
    throw validation_error("time series '" + ts.label +
                           "' has non-positive sampling rate");
  for (double v : ts.samples)
    if (!std::isfinite(v))
      throw validation_error("time series '" + ts.label +
                             "' contains a non-finite sample");
}

inline void validate(const ChannelSet& set) {
  std::vector<std::string> seen;
  for (const auto& ch : set.channels) {
    validate(ch);
    if (ch.rate_hz != set.channels.front().rate_hz)
      throw validation_error("channel set '" + set.set_label +
                             "' mixes sampling rates");
    for (const auto& s : seen)
      if (s == ch.label)
        throw validation_error("duplicate channel label '" + ch.label + "'");
    seen.push_back(ch.label);
  }
}

// One ASCII sample per line; blank lines and surrounding whitespace are
// skipped (the published files end with a trailing newline).
inline TimeSeries load_bonn_segment(const std::string& path,
                                    double rate_hz = kBonnRateHz) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  TimeSeries ts;
  ts.rate_hz = rate_hz;
  ts.label = std::filesystem::path(path).stem().string();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto v = parse_double(line);
    if (!v || !std::isfinite(*v))
      throw validation_error("non-numeric line " + std::to_string(line_no) +
                             " in '" + path + "'");
    ts.samples.push_back(*v);
  }
  if (ts.samples.empty())
    throw validation_error("zero samples in '" + path + "'");
  return ts;
}

enum class Orientation { kRowsAreChannels, kColumnsAreChannels };

// Generic CSV matrix; labels come from the header row when present,
// otherwise from the positional index.
inline ChannelSet load_csv_matrix(const std::string& path,
                                  Orientation orientation, double rate_hz) {
  const CsvMatrix csv = read_matrix_csv(path);
  Eigen::MatrixXd m = csv.values;
  if (orientation == Orientation::kRowsAreChannels) m.transposeInPlace();
  ChannelSet set;
  set.set_label = std::filesystem::path(path).stem().string();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    TimeSeries ts;
    ts.rate_hz = rate_hz;
    if (orientation == Orientation::kColumnsAreChannels &&
        static_cast<Eigen::Index>(csv.header.size()) == m.cols())
      ts.label = csv.header[static_cast<size_t>(c)];
    else
      ts.label = "ch" + std::to_string(c);
    ts.samples.assign(m.col(c).begin(), m.col(c).end());
    set.channels.push_back(std::move(ts));
  }
  validate(set);
  return set;
}

// Draw `count` channels without replacement. Selection is a pure function of
// (set, count, seed): a partial Fisher-Yates shuffle over indices driven by
// splitmix64, with the chosen indices restored to ascending order.
inline ChannelSet select_channels(const ChannelSet& set, int count,
                                  std::uint64_t seed) {
  const int n = static_cast<int>(set.channels.size());
  if (count < 1 || count > n)
    throw validation_error("cannot select " + std::to_string(count) +
                           " channels from " + std::to_string(n));
  const auto idx = sample_without_replacement(n, count, seed);
  ChannelSet out;
  out.set_label = set.set_label;
  for (int i : idx) out.channels.push_back(set.channels[static_cast<size_t>(i)]);
  return out;
}

// Columns are channels, header row carries the labels.
inline void write_channelset_csv(const std::string& path,
                                 const ChannelSet& set) {
  if (set.channels.empty())
    throw validation_error("cannot serialize an empty channel set");
  const size_t len = set.channels.front().samples.size();
  for (const auto& ch : set.channels)
    if (ch.samples.size() != len)
      throw validation_error("channels of unequal length in '" +
                             set.set_label + "'");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(len),
                    static_cast<Eigen::Index>(set.channels.size()));
  std::vector<std::string> header;
  for (size_t c = 0; c < set.channels.size(); ++c) {
    header.push_back(set.channels[c].label);
    for (size_t r = 0; r < len; ++r)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          set.channels[c].samples[r];
  }
  write_matrix_csv(path, m, header);
}

}  // namespace homotop
