#include "cmmn/gaussian_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmmn/errors.hpp"

namespace cmmn::ot {

namespace {

void check_gaussian(const GaussianDist& g, const char* label) {
  if (g.cov.rows() != g.cov.cols() || g.cov.rows() != g.mean.size())
    fail(ErrorCode::DimMismatch, std::string(label) + ": mean/covariance shapes disagree");
  const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
  if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(ErrorCode::NotSymmetric, std::string(label) + ": covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    fail(ErrorCode::NotPsd, std::string(label) + ": covariance has a negative eigenvalue");
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
  Eigen::VectorXd values = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * values.asDiagonal() * es.eigenvectors().transpose();
}

double bures_wasserstein_sq(const GaussianDist& src, const GaussianDist& tgt) {
  check_gaussian(src, "source");
  check_gaussian(tgt, "target");
  if (src.dim() != tgt.dim())
    fail(ErrorCode::DimMismatch, "source dim " + std::to_string(src.dim()) + " vs target dim " +
                                     std::to_string(tgt.dim()));

  const Eigen::MatrixXd tgt_root = matrix_sqrt(tgt.cov);
  const Eigen::MatrixXd cross = matrix_sqrt(tgt_root * src.cov * tgt_root);
  const double mean_term = (src.mean - tgt.mean).squaredNorm();
  const double bures = (src.cov + tgt.cov - 2.0 * cross).trace();
  const double total = mean_term + bures;
  if (total < -1e-8)
    fail(ErrorCode::NotPsd, "distance came out significantly negative; inputs are not PSD");
  return std::max(total, 0.0);
}

AffineMap monge_map(const GaussianDist& src, const GaussianDist& tgt, double eps_spd) {
  check_gaussian(src, "source");
  check_gaussian(tgt, "target");
  if (src.dim() != tgt.dim()) fail(ErrorCode::DimMismatch, "source/target dims disagree");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(src.cov));
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig <= eps_spd)
    fail(ErrorCode::SingularSource,
         "source covariance min eigenvalue " + std::to_string(min_eig) + " <= " +
             std::to_string(eps_spd));

  const Eigen::VectorXd roots = es.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd src_root =
      es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd src_root_inv =
      es.eigenvectors() * roots.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

  const Eigen::MatrixXd middle = matrix_sqrt(src_root * tgt.cov * src_root);
  AffineMap map;
  map.matrix = symmetrize(src_root_inv * middle * src_root_inv);
  map.source_mean = src.mean;
  map.target_mean = tgt.mean;
  return map;
}

BarycenterResult barycenter_fixed_point(std::span<const GaussianDist> dists, double tol,
                                        std::size_t max_iter) {
  if (dists.empty()) fail(ErrorCode::EmptyInput, "barycenter of zero distributions");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidSpec, "tol must be > 0");
  const std::size_t dim = dists.front().dim();
  for (const auto& g : dists) {
    check_gaussian(g, "input");
    if (g.dim() != dim) fail(ErrorCode::DimMismatch, "inputs disagree on dimension");
  }
  const double inv_k = 1.0 / static_cast<double>(dists.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& g : dists) mean += g.mean;
  mean *= inv_k;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& g : dists) cov += g.cov;
  cov *= inv_k;

  BarycenterResult result;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < max_iter) {
    ++it;
    const Eigen::MatrixXd root = matrix_sqrt(cov);
    Eigen::MatrixXd update = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    for (const auto& g : dists) update += matrix_sqrt(root * g.cov * root);
    update *= inv_k;
    residual = (cov - update).norm() / std::max(cov.norm(), 1e-300);
    cov = symmetrize(update);
    if (residual <= tol) break;
  }

  result.barycenter = GaussianDist{std::move(mean), std::move(cov)};
  result.residual = residual;
  result.iterations = it;
  result.converged = residual <= tol;
  return result;
}

}  // namespace cmmn::ot
