#pragma once

#include "despd/types.hpp"

#include <Eigen/Dense>

namespace despd {

// Penalized composite-link criterion
//
//   S(eta) = (c - G exp(eta))' W (c - G exp(eta)) + lambda |D eta|^2
//
// and its analytic derivatives. With F = diag(exp(eta)) and signed residuals
// e = G phi - c:
//
//   S'  = 2 F G' W e + 2 lambda D'D eta
//   S'' = 2 diag(F G' W e) + 2 F G' W G F + 2 lambda D'D
//
// All three throw NumericalError on non-finite eta.

double objective(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                 const DesignMatrices& design, double lambda);

Eigen::VectorXd gradient(const Eigen::VectorXd& eta,
                         const Eigen::VectorXd& prices,
                         const DesignMatrices& design, double lambda);

Eigen::MatrixXd hessian(const Eigen::VectorXd& eta,
                        const Eigen::VectorXd& prices,
                        const DesignMatrices& design, double lambda);

/// Weighted residual sum of squares only.
double weighted_rss(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                    const DesignMatrices& design);

}  // namespace despd
