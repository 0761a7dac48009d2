#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/dimreduce/types.hpp"
#include "homotop/rng.hpp"

namespace homotop {

struct TsneParams {
  double perplexity = 30.0;
  double eta = 100.0;       // learning rate
  int iterations = 500;     // T
  bool symmetrize = false;  // false: normalize p over all pairs (asymmetric)
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  int momentum_switch = 250;
};

// Per-iteration observability for invariant checks.
struct TsneTrace {
  std::vector<double> kl;
  std::vector<double> p_sum;
  std::vector<double> q_sum;
};

namespace tsne_detail {

// binary search for beta_k = 1/(2 sigma_k) matching the conditional row
// entropy to log(perplexity)
inline Eigen::VectorXd perplexity_betas(const Eigen::MatrixXd& d2,
                                        double perplexity) {
  const Eigen::Index n = d2.rows();
  const double target = std::log(perplexity);
  Eigen::VectorXd betas(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double beta = 1.0, lo = -std::numeric_limits<double>::infinity(),
           hi = std::numeric_limits<double>::infinity();
    double hdiff = 0;
    for (int it = 0; it < 64; ++it) {
      double sum = 0, weighted = 0;
      for (Eigen::Index l = 0; l < n; ++l) {
        if (l == k) continue;
        const double p = std::exp(-beta * d2(k, l));
        sum += p;
        weighted += beta * d2(k, l) * p;
      }
      // a fully underflowed row means beta is far too large: entropy ~ 0
      const double entropy = sum > 0 ? weighted / sum + std::log(sum) : 0.0;
      hdiff = entropy - target;
      if (std::abs(hdiff) < 1e-7) break;
      if (hdiff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2 : 0.5 * (beta + lo);
      }
    }
    if (!(std::abs(hdiff) < 1e-3))
      throw compute_error(
          "tsne: perplexity binary search failed to bracket at point " +
          std::to_string(k));
    betas(k) = beta;
  }
  return betas;
}

}  // namespace tsne_detail

// High-dimensional affinities p_kl. Default form: p_kl =
// exp(-beta_k |v_k-v_l|^2) normalized over all ordered pairs, with beta_k
// from the per-point perplexity search. With symmetrize, the conventional
// (p_{l|k}+p_{k|l})/2N variant is produced instead. Either way the entries
// sum to one.
inline Eigen::MatrixXd tsne_input_probabilities(const Eigen::MatrixXd& cloud,
                                                double perplexity,
                                                bool symmetrize = false) {
  const Eigen::Index n = cloud.rows();
  if (n < 2) throw validation_error("tsne: need at least 2 points");
  if (!(perplexity > 0) || perplexity >= static_cast<double>(n))
    throw validation_error("tsne: require 0 < perplexity < N");
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (cloud.row(i) - cloud.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  const Eigen::VectorXd betas = tsne_detail::perplexity_betas(d2, perplexity);
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      p(k, l) = (k == l) ? 0.0 : std::exp(-betas(k) * d2(k, l));
  if (symmetrize) {
    // row-normalize to conditionals, then symmetrize
    for (Eigen::Index k = 0; k < n; ++k) {
      const double row = p.row(k).sum();
      if (row > 0) p.row(k) /= row;
    }
    p = (p + p.transpose().eval()) / (2.0 * static_cast<double>(n));
  } else {
    p /= p.sum();
  }
  return p;
}

// Student-t affinities of the current layout: q_kl = (1+d_kl)^{-1} / Z.
inline Eigen::MatrixXd tsne_output_probabilities(const Eigen::MatrixXd& u) {
  const Eigen::Index n = u.rows();
  Eigen::MatrixXd q(n, n);
  double z = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    q(k, k) = 0;
    for (Eigen::Index l = k + 1; l < n; ++l) {
      const double w = 1.0 / (1.0 + (u.row(k) - u.row(l)).squaredNorm());
      q(k, l) = w;
      q(l, k) = w;
      z += 2 * w;
    }
  }
  q /= z;
  return q;
}

// KL(P || Q) over all ordered pairs
inline double tsne_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& u) {
  const Eigen::MatrixXd q = tsne_output_probabilities(u);
  double kl = 0;
  for (Eigen::Index k = 0; k < p.rows(); ++k)
    for (Eigen::Index l = 0; l < p.cols(); ++l)
      if (k != l && p(k, l) > 0) kl += p(k, l) * std::log(p(k, l) / q(k, l));
  return kl;
}

// Exact gradient of the KL objective:
//   dL/du_k = 2 sum_l (p_kl + p_lk - 2 q_kl) (u_k - u_l) (1 + d_kl)^{-1}.
// For symmetric p this reduces to 4 sum_l (p_kl - q_kl)(u_k - u_l)(1+d)^-1.
inline Eigen::MatrixXd tsne_gradient(const Eigen::MatrixXd& p,
                                     const Eigen::MatrixXd& u) {
  const Eigen::Index n = u.rows(), m = u.cols();
  const Eigen::MatrixXd q = tsne_output_probabilities(u);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (k == l) continue;
      const double w = 1.0 / (1.0 + (u.row(k) - u.row(l)).squaredNorm());
      const double coef = 2.0 * (p(k, l) + p(l, k) - 2.0 * q(k, l)) * w;
      grad.row(k) += coef * (u.row(k) - u.row(l));
    }
  }
  return grad;
}

// Gradient descent with momentum on the KL divergence. Layout starts at
// N(0, 1e-4 I) from the given seed.
inline Embedding tsne(const Eigen::MatrixXd& cloud, int m,
                      const TsneParams& params, std::uint64_t seed,
                      Warnings* warnings = nullptr,
                      TsneTrace* trace = nullptr) {
  const Eigen::Index n = cloud.rows();
  if (n < 4) throw validation_error("tsne: need at least 4 points");
  if (m < 1) throw validation_error("tsne: m >= 1");
  if (params.iterations < 1) throw validation_error("tsne: T >= 1");
  const Eigen::MatrixXd p =
      tsne_input_probabilities(cloud, params.perplexity, params.symmetrize);
  SplitMix64 rng(seed);
  Eigen::MatrixXd u(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) u(i, j) = 1e-2 * rng.normal();
  Eigen::MatrixXd u_prev = u;
  const double kl0 = tsne_kl(p, u);
  auto record = [&](const Eigen::MatrixXd& layout) {
    if (!trace) return;
    trace->kl.push_back(tsne_kl(p, layout));
    trace->p_sum.push_back(p.sum());
    trace->q_sum.push_back(tsne_output_probabilities(layout).sum());
  };
  record(u);
  for (int t = 1; t <= params.iterations; ++t) {
    const Eigen::MatrixXd grad = tsne_gradient(p, u);
    const double momentum = t < params.momentum_switch ? params.momentum_early
                                                       : params.momentum_late;
    const Eigen::MatrixXd u_next =
        u - params.eta * grad + momentum * (u - u_prev);
    u_prev = u;
    u = u_next;
    record(u);
  }
  const double kl_final = tsne_kl(p, u);
  if (kl_final > kl0)
    warn(warnings, "tsne: KL increased over the run (" + format_double(kl0) +
                       " -> " + format_double(kl_final) +
                       "); consider a smaller eta");
  Embedding out;
  out.method = "tsne";
  out.params = {{"m", m},
                {"perplexity", params.perplexity},
                {"eta", params.eta},
                {"iterations", params.iterations},
                {"symmetrize", params.symmetrize},
                {"seed", seed},
                {"kl_initial", kl0},
                {"kl_final", kl_final}};
  out.coords = u;
  require_finite(out.coords, "tsne embedding");
  return out;
}

}  // namespace homotop
