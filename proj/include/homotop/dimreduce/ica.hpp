#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "homotop/common.hpp"
#include "homotop/dimreduce/mds.hpp"
#include "homotop/dimreduce/types.hpp"
#include "homotop/rng.hpp"

namespace homotop {

struct WhitenResult {
  Eigen::MatrixXd cloud;      // N x m, zero column means, identity covariance
  Eigen::MatrixXd transform;  // m x d, rows E^{-1/2} V^T for kept directions
  Eigen::RowVectorXd means;   // 1 x d column means of the input
  int dropped = 0;            // zero-variance directions removed
};

// Center and linearly transform so the (1/N-normalized) covariance becomes
// the identity. Directions of (numerically) zero variance are dropped.
inline WhitenResult whiten(const Eigen::MatrixXd& cloud,
                           Warnings* warnings = nullptr) {
  const Eigen::Index n = cloud.rows(), d = cloud.cols();
  if (n < 2) throw validation_error("whiten: need at least 2 points");
  WhitenResult result;
  result.means = cloud.colwise().mean();
  const Eigen::MatrixXd centered = cloud.rowwise() - result.means;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw compute_error("whiten: eigendecomposition failed");
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_max > 0))
    throw validation_error("whiten: all points identical (zero covariance)");
  const double cutoff = lambda_max * 1e-10;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = d - 1; i >= 0; --i)  // descending variance
    if (eig.eigenvalues()(i) > cutoff) kept.push_back(i);
  result.dropped = static_cast<int>(d) - static_cast<int>(kept.size());
  if (result.dropped > 0)
    warn(warnings, "whiten: dropped " + std::to_string(result.dropped) +
                       " zero-variance direction(s)");
  result.transform.resize(static_cast<Eigen::Index>(kept.size()), d);
  for (size_t r = 0; r < kept.size(); ++r) {
    Eigen::VectorXd v = eig.eigenvectors().col(kept[r]);
    detail::fix_sign(v);
    result.transform.row(static_cast<Eigen::Index>(r)) =
        v.transpose() / std::sqrt(eig.eigenvalues()(kept[r]));
  }
  result.cloud = centered * result.transform.transpose();
  require_finite(result.cloud, "whitened cloud");
  return result;
}

// Contrast functions G for the negentropy approximation, with derivatives
// g = G' and g'. alpha in [1,2]; sigma near 1.
struct Contrast {
  enum class Kind { kLogCosh, kGauss, kQuartic };
  Kind kind = Kind::kLogCosh;
  double alpha = 1.0;
  double sigma = 1.0;

  double G(double u) const {
    switch (kind) {
      case Kind::kLogCosh: return std::log(std::cosh(alpha * u)) / alpha;
      case Kind::kGauss: return -std::exp(-0.5 * sigma * u * u) / sigma;
      case Kind::kQuartic: return 0.25 * u * u * u * u;
    }
    return 0;
  }
  double g(double u) const {
    switch (kind) {
      case Kind::kLogCosh: return std::tanh(alpha * u);
      case Kind::kGauss: return u * std::exp(-0.5 * sigma * u * u);
      case Kind::kQuartic: return u * u * u;
    }
    return 0;
  }
  double g_prime(double u) const {
    switch (kind) {
      case Kind::kLogCosh: {
        const double t = std::tanh(alpha * u);
        return alpha * (1.0 - t * t);
      }
      case Kind::kGauss:
        return (1.0 - sigma * u * u) * std::exp(-0.5 * sigma * u * u);
      case Kind::kQuartic: return 3.0 * u * u;
    }
    return 0;
  }

  // E[G(z)] for standard normal z (Simpson's rule on [-10, 10]; the gauss
  // contrast has a closed form)
  double gaussian_expectation() const {
    if (kind == Kind::kGauss) return -1.0 / (sigma * std::sqrt(1.0 + sigma));
    if (kind == Kind::kQuartic) return 0.75;
    const int steps = 2000;
    const double a = -10.0, b = 10.0, h = (b - a) / steps;
    double sum = 0;
    for (int i = 0; i <= steps; ++i) {
      const double x = a + h * i;
      const double f =
          G(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      sum += f * ((i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2));
    }
    return sum * h / 3.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::kLogCosh: return "logcosh";
      case Kind::kGauss: return "gauss";
      case Kind::kQuartic: return "quartic";
    }
    return "?";
  }
};

struct IcaResult {
  Eigen::MatrixXd unmixing;    // p x d, unit-norm rows
  Eigen::MatrixXd sources;     // N x p, s = W^T v per column
  Eigen::MatrixXd whitening;   // transform used before extraction (may be empty)
  Eigen::RowVectorXd means;    // column means removed by whitening
  std::vector<double> negentropy;  // (E[G(s)] - E[G(z)])^2 per component
};

struct FastIcaOptions {
  int n_components = 0;  // 0: as many as the whitened dimension
  double tol = 1e-6;     // on ||<w+, w>| - 1|
  int max_iter = 1000;
  Contrast contrast;
};

// One-unit Newton fixed-point iteration with deflation: each new direction
// is Gram-Schmidt-orthogonalized against the accepted ones and normalized.
// Input must already be whitened.
inline IcaResult fastica_extract(const Eigen::MatrixXd& whitened,
                                 const FastIcaOptions& opt, std::uint64_t seed,
                                 Warnings* warnings = nullptr) {
  const Eigen::Index n = whitened.rows(), d = whitened.cols();
  if (n < 2) throw validation_error("fastica: need at least 2 points");
  {
    const Eigen::MatrixXd cov =
        whitened.transpose() * whitened / static_cast<double>(n) -
        (whitened.colwise().mean().transpose() * whitened.colwise().mean());
    if ((cov - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-6)
      throw validation_error("fastica: input is not whitened");
  }
  int p = opt.n_components > 0 ? opt.n_components : static_cast<int>(d);
  if (p > d)
    throw validation_error("fastica: more components than dimensions");
  IcaResult result;
  result.unmixing.resize(p, d);
  SplitMix64 rng(seed);
  const double ez = opt.contrast.gaussian_expectation();
  for (int comp = 0; comp < p; ++comp) {
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < d; ++i) w(i) = rng.normal();
    // deflation: stay orthogonal to previously accepted directions
    auto deflate = [&](Eigen::VectorXd& v) {
      for (int q = 0; q < comp; ++q) {
        const auto prev = result.unmixing.row(q).transpose();
        v -= v.dot(prev) * prev;
      }
      const double norm = v.norm();
      if (norm < 1e-12)
        throw compute_error("fastica: degenerate direction during deflation");
      v /= norm;
    };
    deflate(w);
    bool converged = false;
    std::vector<double> deltas;
    for (int it = 0; it < opt.max_iter; ++it) {
      const Eigen::VectorXd proj = whitened * w;  // w^T v per sample
      Eigen::VectorXd gp(n), gpp(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        gp(i) = opt.contrast.g(proj(i));
        gpp(i) = opt.contrast.g_prime(proj(i));
      }
      Eigen::VectorXd w_next =
          (whitened.transpose() * gp) / static_cast<double>(n) -
          gpp.mean() * w;
      deflate(w_next);
      const double delta = std::abs(std::abs(w_next.dot(w)) - 1.0);
      deltas.push_back(delta);
      w = w_next;
      if (delta < opt.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::string tail;
      const size_t show = std::min<size_t>(5, deltas.size());
      for (size_t i = deltas.size() - show; i < deltas.size(); ++i)
        tail += (tail.empty() ? "" : ", ") + format_double(deltas[i]);
      throw compute_error("fastica: component " + std::to_string(comp) +
                          " did not converge in " +
                          std::to_string(opt.max_iter) +
                          " iterations; last deltas [" + tail + "]");
    }
    result.unmixing.row(comp) = w.transpose();
  }
  result.sources = whitened * result.unmixing.transpose();
  for (int comp = 0; comp < p; ++comp) {
    const Eigen::VectorXd s = result.sources.col(comp);
    double eg = 0;
    for (Eigen::Index i = 0; i < n; ++i) eg += opt.contrast.G(s(i));
    eg /= static_cast<double>(n);
    const double j = (eg - ez) * (eg - ez);
    result.negentropy.push_back(j);
    if (j < 1e-4)
      warn(warnings, "fastica: component " + std::to_string(comp) +
                         " has near-zero negentropy (" + format_double(j) +
                         "); data may be Gaussian in that direction");
  }
  return result;
}

// whiten + extract + package the first m sources as an embedding
inline Embedding fastica_reduce(const Eigen::MatrixXd& cloud, int m,
                                const FastIcaOptions& options,
                                std::uint64_t seed,
                                Warnings* warnings = nullptr,
                                IcaResult* full_result = nullptr) {
  WhitenResult white = whiten(cloud, warnings);
  FastIcaOptions opt = options;
  const int avail = static_cast<int>(white.cloud.cols());
  if (m < 1) throw validation_error("fastica_reduce: m >= 1");
  if (m > avail)
    throw validation_error("fastica_reduce: m exceeds whitened dimension " +
                           std::to_string(avail));
  if (opt.n_components == 0) opt.n_components = m;
  IcaResult ica = fastica_extract(white.cloud, opt, seed, warnings);
  ica.whitening = white.transform;
  ica.means = white.means;
  Embedding out;
  out.method = "fastica";
  out.params = {{"m", m},
                {"contrast", opt.contrast.name()},
                {"alpha", opt.contrast.alpha},
                {"tol", opt.tol},
                {"max_iter", opt.max_iter},
                {"seed", seed}};
  out.coords = ica.sources.leftCols(m);
  if (full_result) *full_result = std::move(ica);
  return out;
}

}  // namespace homotop
