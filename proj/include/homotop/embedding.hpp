#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/ingest.hpp"

namespace homotop {

// Points are rows; columns are coordinates.
using PointCloud = Eigen::MatrixXd;

struct DelayParams {
  int dim = 12;  // embedding dimension d
  int lag = 1;   // delay in samples
};

inline void validate(const DelayParams& p, int series_length) {
  if (p.dim < 1 || p.lag < 1)
    throw validation_error("delay embedding needs dim >= 1 and lag >= 1");
  if ((p.dim - 1) * p.lag >= series_length)
    throw validation_error(
        "series too short: length " + std::to_string(series_length) +
        " <= (dim-1)*lag = " + std::to_string((p.dim - 1) * p.lag));
}

// Delay embedding with backward lags: the row for time t is
// (x(t), x(t-lag), ..., x(t-(d-1)lag)), t running from (d-1)lag to the end.
inline PointCloud takens_embed(const TimeSeries& series,
                               const DelayParams& params) {
  validate(series);
  const int len = series.length();
  validate(params, len);
  const int d = params.dim, lag = params.lag;
  const int n = len - (d - 1) * lag;
  PointCloud cloud(n, d);
  for (int r = 0; r < n; ++r) {
    const int t = r + (d - 1) * lag;
    for (int j = 0; j < d; ++j) cloud(r, j) = series.samples[static_cast<size_t>(t - j * lag)];
  }
  return cloud;
}

struct FnnResult {
  int estimated_dim = 0;
  std::vector<double> fractions;  // false-neighbor fraction for d = 1..max_dim
  bool plateau_found = false;     // false: no d fell below the threshold
};

namespace detail {

inline double series_std(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace detail

// False nearest neighbors with the distance-ratio criterion. A neighbor pair
// at dimension d is false when the extra (d+1)-th coordinate either blows up
// relative to the d-dimensional distance (ratio_tol) or in absolute terms
// (abs_tol; default 2x the signal standard deviation). Nearest-neighbor
// search is exact brute force.
inline FnnResult false_nearest_neighbors(const TimeSeries& series, int max_dim,
                                         int lag, double ratio_tol = 10.0,
                                         double abs_tol = -1.0,
                                         double threshold = 0.01) {
  validate(series);
  if (max_dim < 1) throw validation_error("false_nearest_neighbors: max_dim >= 1");
  const int len = series.length();
  const double sd = detail::series_std(series.samples);
  if (sd == 0.0)
    throw compute_error("degenerate series: constant input has zero "
                        "nearest-neighbor distances");
  if (abs_tol < 0) abs_tol = 2.0 * sd;
  // every point needs its (max_dim+1)-th coordinate, hence the extra lag
  const int n = len - max_dim * lag;
  if (n < 2)
    throw validation_error("series too short for max_dim " +
                           std::to_string(max_dim) + " at lag " +
                           std::to_string(lag));
  const auto& x = series.samples;
  // common index set: t in [max_dim*lag, len)
  const int t0 = max_dim * lag;
  FnnResult result;
  result.fractions.resize(static_cast<size_t>(max_dim), 1.0);
  for (int d = 1; d <= max_dim; ++d) {
    int false_count = 0;
    for (int a = 0; a < n; ++a) {
      const int ta = t0 + a;
      // exact nearest neighbor of a in the d-dimensional embedding
      double best = std::numeric_limits<double>::infinity();
      int nn = -1;
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const int tb = t0 + b;
        double dist2 = 0;
        for (int j = 0; j < d; ++j) {
          const double diff = x[static_cast<size_t>(ta - j * lag)] -
                              x[static_cast<size_t>(tb - j * lag)];
          dist2 += diff * diff;
        }
        if (dist2 < best) {
          best = dist2;
          nn = b;
        }
      }
      const double rd = std::sqrt(best);
      const double extra = std::abs(x[static_cast<size_t>(ta - d * lag)] -
                                    x[static_cast<size_t>(t0 + nn - d * lag)]);
      // the 1e-12*sd floor keeps coincident points (periodic signals, exact
      // revisits) from turning the ratio into noise/noise; a genuine fold
      // still shows an O(attractor-size) jump in the extra coordinate
      const bool is_false =
          extra > std::max(ratio_tol * rd, 1e-12 * sd) || extra > abs_tol;
      if (is_false) ++false_count;
    }
    result.fractions[static_cast<size_t>(d - 1)] =
        static_cast<double>(false_count) / static_cast<double>(n);
  }
  for (int d = 1; d <= max_dim; ++d) {
    if (result.fractions[static_cast<size_t>(d - 1)] < threshold) {
      result.estimated_dim = d;
      result.plateau_found = true;
      return result;
    }
  }
  result.estimated_dim = max_dim;  // no plateau; caller should warn
  return result;
}

}  // namespace homotop
