#pragma once

#include "despd/types.hpp"

#include <Eigen/Dense>

namespace despd {

/// Linearization of the composite link model around a fitted eta:
/// E = G diag(phi), the observation weights and the penalty D'D.
struct LinearizedSystem {
  Eigen::MatrixXd jacobian;
  Eigen::VectorXd weights;
  Eigen::MatrixXd penalty;
  double lambda = 0.0;

  /// E'WE + lambda D'D.
  Eigen::MatrixXd normal_matrix() const;
};

LinearizedSystem linearize(const SpdFit& fit);

/// Hat matrix H = E (E'WE + lambda D'D)^-1 E'W.
Eigen::MatrixXd hat_matrix(const LinearizedSystem& system);

/// Effective dimension tr(H), computed as tr((E'WE + lambda D'D)^-1 E'WE).
double hat_matrix_trace(const LinearizedSystem& system);
double hat_matrix_trace(const SpdFit& fit);

/// (E'WE + lambda D'D)^-1 at the fit's linearization for an arbitrary lambda.
Eigen::MatrixXd penalized_inverse(const SpdFit& fit, double lambda);

/// sigma2 (E'WE + lambda D'D)^-1, symmetrized.
Eigen::MatrixXd covariance_eta(const SpdFit& fit);

/// Delta-method covariance of phi: F cov(eta) F with F = diag(phi).
Eigen::MatrixXd covariance_phi(const SpdFit& fit);

}  // namespace despd
