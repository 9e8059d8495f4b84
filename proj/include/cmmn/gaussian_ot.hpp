#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>

namespace cmmn::ot {

/// Multivariate Gaussian with symmetric positive semidefinite covariance.
struct GaussianDist {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Affine transport map x -> A (x - source_mean) + target_mean with
/// symmetric A.
struct AffineMap {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd source_mean;
  Eigen::VectorXd target_mean;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    return matrix * (x - source_mean) + target_mean;
  }
};

/// Principal square root of a symmetric PSD matrix (eigendecomposition with
/// eigenvalues clamped at zero).
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& m);

/// Squared 2-Wasserstein distance between Gaussians:
/// |m_s - m_t|^2 + Tr(S_s + S_t - 2 (S_t^1/2 S_s S_t^1/2)^1/2).
double bures_wasserstein_sq(const GaussianDist& src, const GaussianDist& tgt);

/// Optimal transport map from src onto tgt. Requires the source covariance
/// to be strictly positive definite (min eigenvalue > eps_spd).
AffineMap monge_map(const GaussianDist& src, const GaussianDist& tgt, double eps_spd = 1e-10);

struct BarycenterResult {
  GaussianDist barycenter;
  double residual = 0.0;       // relative Frobenius residual of the optimality condition
  std::size_t iterations = 0;
  bool converged = false;      // false means max_iter hit; best iterate returned
};

/// Wasserstein barycenter by fixed-point iteration on the covariance,
/// starting from the arithmetic covariance mean. The mean is the average of
/// the input means.
BarycenterResult barycenter_fixed_point(std::span<const GaussianDist> dists, double tol = 1e-10,
                                        std::size_t max_iter = 300);

}  // namespace cmmn::ot
