#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/metrics.hpp"
#include "homotop/persistence.hpp"
#include "homotop/rng.hpp"

namespace homotop {

// Persistence landscape sampled on a uniform grid over [0, cap]:
// lambda_k(t) = k-th largest of max(0, min(t - birth, death - t)).
struct Landscape {
  double cap = 1.0;
  int grid_size = 256;
  std::vector<std::vector<double>> levels;  // levels[k][i], k-th landscape

  double t(int i) const {
    return cap * static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  double step() const { return cap / static_cast<double>(grid_size - 1); }
};

// Essential classes are clipped to the cap before evaluating the tents.
inline Landscape landscape(const std::vector<DiagramPoint>& slice, int k_max,
                           int grid_size, double cap) {
  if (grid_size < 2) throw validation_error("landscape: grid_size >= 2");
  if (!(cap > 0)) throw validation_error("landscape: cap > 0");
  for (const auto& p : slice)
    if (!p.essential() && p.death > cap)
      throw validation_error("landscape: cap below max finite death");
  Landscape ls;
  ls.cap = cap;
  ls.grid_size = grid_size;
  const int levels = std::min<int>(k_max, static_cast<int>(slice.size()));
  ls.levels.assign(static_cast<size_t>(levels),
                   std::vector<double>(static_cast<size_t>(grid_size), 0.0));
  if (levels == 0) return ls;
  std::vector<double> tents(slice.size());
  for (int i = 0; i < grid_size; ++i) {
    const double t = ls.t(i);
    for (size_t j = 0; j < slice.size(); ++j) {
      const double death =
          slice[j].essential() ? cap : slice[j].death;
      tents[j] = std::max(0.0, std::min(t - slice[j].birth, death - t));
    }
    std::sort(tents.rbegin(), tents.rend());
    for (int k = 0; k < levels; ++k)
      ls.levels[static_cast<size_t>(k)][static_cast<size_t>(i)] =
          tents[static_cast<size_t>(k)];
  }
  return ls;
}

struct TestReport {
  double statistic = 0;
  double p_value = 1;
  int n_perm = 0;       // 0 when the p-value is exact
  bool exact = false;
  std::uint64_t seed = 0;
  std::vector<std::string> groups;
};

inline nlohmann::json to_json(const TestReport& report) {
  return {{"statistic", report.statistic}, {"p_value", report.p_value},
          {"n_perm", report.n_perm},       {"exact", report.exact},
          {"seed", report.seed},           {"groups", report.groups}};
}

inline void write_report_json(const std::string& path,
                              const TestReport& report) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << to_json(report).dump(2) << '\n';
}

namespace detail {

// L2 grid norm between the mean first landscapes of two index groups
inline double mean_landscape_statistic(
    const std::vector<std::vector<double>>& first_levels,
    const std::vector<int>& pool, size_t split, double grid_step) {
  const size_t grid = first_levels.front().size();
  std::vector<double> mean_a(grid, 0.0), mean_b(grid, 0.0);
  for (size_t i = 0; i < pool.size(); ++i) {
    auto& target = i < split ? mean_a : mean_b;
    const auto& level = first_levels[static_cast<size_t>(pool[i])];
    for (size_t g = 0; g < grid; ++g) target[g] += level[g];
  }
  const double na = static_cast<double>(split);
  const double nb = static_cast<double>(pool.size() - split);
  double ss = 0;
  for (size_t g = 0; g < grid; ++g) {
    const double diff = mean_a[g] / na - mean_b[g] / nb;
    ss += diff * diff;
  }
  return std::sqrt(ss * grid_step);
}

}  // namespace detail

// Two-sample permutation test on persistence diagrams. The statistic is the
// L2 grid norm between the group means of the first landscape level; labels
// are permuted n_perm times with per-replicate derived seeds, and the
// p-value uses the add-one estimator. Group sizes are canonicalized
// (smaller group first) so swapping the arguments cannot change the result.
inline TestReport permutation_test(const std::vector<PersistenceDiagram>& a,
                                   const std::vector<PersistenceDiagram>& b,
                                   int dim, int n_perm, std::uint64_t seed,
                                   int grid_size = 256) {
  if (a.empty() || b.empty())
    throw validation_error("permutation_test: both groups must be non-empty");
  if (n_perm < 1) throw validation_error("permutation_test: n_perm >= 1");
  if (b.size() < a.size()) return permutation_test(b, a, dim, n_perm, seed, grid_size);
  double cap = 0;
  auto scan_cap = [&](const std::vector<PersistenceDiagram>& group) {
    for (const auto& diagram : group)
      for (const auto& p : diagram.at(dim)) {
        cap = std::max(cap, p.birth);
        if (!p.essential()) cap = std::max(cap, p.death);
      }
  };
  scan_cap(a);
  scan_cap(b);
  if (cap <= 0) cap = 1.0;
  const size_t total = a.size() + b.size();
  std::vector<std::vector<double>> first_levels;
  first_levels.reserve(total);
  auto add_levels = [&](const std::vector<PersistenceDiagram>& group) {
    for (const auto& diagram : group) {
      const Landscape ls = landscape(diagram.at(dim), 1, grid_size, cap);
      first_levels.push_back(
          ls.levels.empty()
              ? std::vector<double>(static_cast<size_t>(grid_size), 0.0)
              : ls.levels.front());
    }
  };
  add_levels(a);
  add_levels(b);
  const double grid_step = cap / static_cast<double>(grid_size - 1);
  std::vector<int> pool(total);
  std::iota(pool.begin(), pool.end(), 0);
  const double observed =
      detail::mean_landscape_statistic(first_levels, pool, a.size(), grid_step);
  // replicates shuffle a canonically ordered pool (sorted landscapes), so the
  // permutation distribution does not depend on which group came first
  std::vector<int> canonical = pool;
  std::sort(canonical.begin(), canonical.end(), [&](int i, int j) {
    return first_levels[static_cast<size_t>(i)] <
           first_levels[static_cast<size_t>(j)];
  });
  int exceed = 0;
  for (int r = 0; r < n_perm; ++r) {
    SplitMix64 rng(derive_seed(seed, "perm/" + std::to_string(r)));
    std::vector<int> shuffled = canonical;
    for (size_t i = total - 1; i > 0; --i) {
      const size_t j = static_cast<size_t>(rng.below(i + 1));
      std::swap(shuffled[i], shuffled[j]);
    }
    const double stat = detail::mean_landscape_statistic(
        first_levels, shuffled, a.size(), grid_step);
    if (stat >= observed) ++exceed;
  }
  TestReport report;
  report.statistic = observed;
  report.p_value =
      (1.0 + static_cast<double>(exceed)) / (static_cast<double>(n_perm) + 1.0);
  report.n_perm = n_perm;
  report.exact = false;
  report.seed = seed;
  return report;
}

namespace detail {

// midranks of the pooled sample, plus the tie group sizes
inline std::pair<std::vector<double>, std::vector<int>> midranks(
    const std::vector<double>& pooled) {
  const size_t n = pooled.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t i, size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> rank(n, 0);
  std::vector<int> ties;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    ties.push_back(static_cast<int>(j - i + 1));
    i = j + 1;
  }
  return {rank, ties};
}

// exact two-sided p-value of the Mann-Whitney U by counting rank subsets:
// ways[u] = number of nA-subsets of ranks {1..n} whose U statistic equals u
inline double wmw_exact_two_sided(int na, int nb, double u_observed) {
  const int u_max = na * nb;
  // dp over items 1..n choosing na of them; count by achieved U
  std::vector<std::vector<double>> ways(
      static_cast<size_t>(na) + 1,
      std::vector<double>(static_cast<size_t>(u_max) + 1, 0.0));
  ways[0][0] = 1;
  // adding the k-th largest remaining rank to group A raises U by the number
  // of B elements below it; the standard recurrence over n items:
  for (int item = 1; item <= na + nb; ++item) {
    for (int chosen = std::min(item, na); chosen >= 1; --chosen) {
      // if item is in A, it beats (item - chosen) B-items placed so far
      const int gain = item - chosen;
      if (gain > u_max) continue;
      for (int u = u_max; u >= gain; --u)
        ways[static_cast<size_t>(chosen)][static_cast<size_t>(u)] +=
            ways[static_cast<size_t>(chosen - 1)][static_cast<size_t>(u - gain)];
    }
  }
  double total = 0, extreme = 0;
  const double center = static_cast<double>(u_max) / 2.0;
  const double dev = std::abs(u_observed - center);
  for (int u = 0; u <= u_max; ++u) {
    const double w = ways[static_cast<size_t>(na)][static_cast<size_t>(u)];
    total += w;
    if (std::abs(static_cast<double>(u) - center) >= dev - 1e-12) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

}  // namespace detail

// Wilcoxon-Mann-Whitney two-sample test, two-sided. Exact enumeration when
// nA+nB <= 12 and there are no ties; otherwise the normal approximation with
// tie and continuity corrections.
inline TestReport wilcoxon_mann_whitney(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw validation_error("wilcoxon_mann_whitney: samples must be non-empty");
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto [rank, ties] = detail::midranks(pooled);
  double rank_sum_a = 0;
  for (int i = 0; i < na; ++i) rank_sum_a += rank[static_cast<size_t>(i)];
  const double u = rank_sum_a - static_cast<double>(na) *
                                    (static_cast<double>(na) + 1.0) / 2.0;
  const bool has_ties =
      std::any_of(ties.begin(), ties.end(), [](int t) { return t > 1; });
  TestReport report;
  report.statistic = u;
  if (na + nb <= 12 && !has_ties) {
    report.exact = true;
    report.p_value = detail::wmw_exact_two_sided(na, nb, u);
    return report;
  }
  const double n = static_cast<double>(na + nb);
  const double mean_u = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  double tie_term = 0;
  for (int t : ties)
    tie_term += static_cast<double>(t) * static_cast<double>(t) *
                    static_cast<double>(t) -
                static_cast<double>(t);
  const double var_u = static_cast<double>(na) * static_cast<double>(nb) /
                       12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var_u <= 0) {  // all pooled values identical
    report.p_value = 1.0;
    return report;
  }
  const double z =
      std::max(0.0, std::abs(u - mean_u) - 0.5) / std::sqrt(var_u);
  report.p_value = std::erfc(z / std::sqrt(2.0));
  return report;
}

// Cell-wise median across a stack of equally-shaped distance tables.
inline DistanceTable median_table(const std::vector<DistanceTable>& tables) {
  if (tables.empty())
    throw validation_error("median_table: need at least one table");
  const DistanceTable& first = tables.front();
  for (const auto& t : tables)
    if (t.labels != first.labels)
      throw validation_error("median_table: tables disagree on labels");
  DistanceTable out;
  out.labels = first.labels;
  out.dim = first.dim;
  const Eigen::Index n = first.values.rows();
  out.values.setZero(n, n);
  std::vector<double> cell(tables.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (size_t k = 0; k < tables.size(); ++k)
        cell[k] = tables[k].values(i, j);
      std::sort(cell.begin(), cell.end());
      const size_t m = cell.size();
      out.values(i, j) =
          m % 2 ? cell[m / 2] : 0.5 * (cell[m / 2 - 1] + cell[m / 2]);
    }
  return out;
}

// the strictly-upper-triangle cells, row-major; the sample a WMW between-set
// comparison runs on
inline std::vector<double> upper_triangle(const DistanceTable& table) {
  std::vector<double> cells;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i)
    for (Eigen::Index j = i + 1; j < table.values.cols(); ++j)
      cells.push_back(table.values(i, j));
  return cells;
}

}  // namespace homotop
