#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "homotop/common.hpp"
#include "homotop/dimreduce/mds.hpp"
#include "homotop/dimreduce/types.hpp"

namespace homotop {

struct KernelSpec {
  enum class Kind { kLinear, kGaussian };
  Kind kind = Kind::kGaussian;
  double sigma = 1.0;  // gaussian: k(x,y) = exp(-sigma |x-y|^2)

  double operator()(const Eigen::RowVectorXd& x,
                    const Eigen::RowVectorXd& y) const {
    if (kind == Kind::kLinear) return x.dot(y);
    return std::exp(-sigma * (x - y).squaredNorm());
  }
  std::string name() const {
    return kind == Kind::kLinear ? "linear" : "gaussian";
  }
};

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& b,
                                     const KernelSpec& kernel) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = kernel(a.row(i), b.row(j));
  return k;
}

struct KrrModel {
  Eigen::MatrixXd train;  // N x d training inputs
  Eigen::VectorXd dual;   // (K + lambda I)^{-1} u
  KernelSpec kernel;
  double lambda = 0;
};

// Ridge regression in the dual: solve (K + lambda I) a = u. lambda = 0 is
// accepted only when K itself is well-conditioned enough to solve.
inline KrrModel krr_fit(const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets,
                        const KernelSpec& kernel, double lambda) {
  if (inputs.rows() != targets.size())
    throw validation_error("krr_fit: inputs and targets disagree on N");
  if (inputs.rows() == 0) throw validation_error("krr_fit: empty training set");
  if (lambda < 0) throw validation_error("krr_fit: lambda must be >= 0");
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k = kernel_matrix(inputs, inputs, kernel);
  k.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> solver(k);
  KrrModel model{inputs, Eigen::VectorXd(), kernel, lambda};
  if (solver.info() == Eigen::Success) model.dual = solver.solve(targets);
  const double scale = std::max(1.0, targets.cwiseAbs().maxCoeff());
  if (solver.info() != Eigen::Success || model.dual.size() != n ||
      !model.dual.allFinite() ||
      (k * model.dual - targets).cwiseAbs().maxCoeff() > 1e-6 * scale)
    throw compute_error(
        "krr_fit: (K + lambda I) is singular; use lambda > 0");
  return model;
}

inline double krr_predict(const KrrModel& model,
                          const Eigen::RowVectorXd& query) {
  if (query.size() != model.train.cols())
    throw validation_error("krr_predict: query dimension " +
                           std::to_string(query.size()) + " != training " +
                           std::to_string(model.train.cols()));
  double y = 0;
  for (Eigen::Index i = 0; i < model.train.rows(); ++i)
    y += model.dual(i) * model.kernel(model.train.row(i), query);
  return y;
}

// Dimension reduction used for the KRR method tag: rotate onto principal
// axes (descending variance, deterministic signs) and keep the first m
// coordinates; each discarded coordinate is regressed on the kept ones with
// kernel ridge so the unexplained residual is recorded in the params echo.
inline Embedding krr_reduce(const Eigen::MatrixXd& cloud, int m,
                            const KernelSpec& kernel, double lambda,
                            Warnings* warnings = nullptr) {
  const Eigen::Index n = cloud.rows(), d = cloud.cols();
  if (n < 2) throw validation_error("krr_reduce: need >= 2 points");
  if (m < 1) throw validation_error("krr_reduce: m >= 1");
  const Eigen::RowVectorXd mean = cloud.colwise().mean();
  const Eigen::MatrixXd centered = cloud.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw compute_error("krr_reduce: eigendecomposition failed");
  Eigen::MatrixXd rotation(d, d);  // columns: principal axes, descending
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - c);
    detail::fix_sign(v);
    rotation.col(c) = v;
  }
  const Eigen::MatrixXd scores = centered * rotation;
  Embedding out;
  out.method = "krr";
  out.params = {{"m", m},
                {"kernel", kernel.name()},
                {"sigma", kernel.sigma},
                {"lambda", lambda}};
  if (m >= d) {
    warn(warnings, "krr_reduce: m >= ambient dimension; rotation only");
    out.coords = scores;
    return out;
  }
  out.coords = scores.leftCols(m);
  std::vector<double> residual_rms;
  for (Eigen::Index j = m; j < d; ++j) {
    const KrrModel model = krr_fit(out.coords, scores.col(j), kernel, lambda);
    double ss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = krr_predict(model, out.coords.row(i)) - scores(i, j);
      ss += r * r;
    }
    residual_rms.push_back(std::sqrt(ss / static_cast<double>(n)));
  }
  out.params["residual_rms"] = residual_rms;
  return out;
}

}  // namespace homotop
