#pragma once

#include <Eigen/Dense>

namespace despd::detail {

/// Cholesky factorization of a symmetric positive-definite matrix. Retries
/// once with a ridge of 1e-10 * max(1, max diag) before throwing
/// SingularSystem.
Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& a, const char* context);

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const char* context);

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& a, const char* context);

struct BorderedSolution {
  Eigen::VectorXd x;
  double multiplier = 0.0;
};

/// Solves [A c; c' 0][x; w] = [b; r] through the Schur complement of A.
BorderedSolution solve_bordered(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& b, double r, const char* context);

}  // namespace despd::detail
