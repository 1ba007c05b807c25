#pragma once

#include "despd/types.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace despd {

/// Starting log-masses for the IRLS iteration.
///
/// FlatUniform puts 1/m on every atom. LogGaussianMoment takes second divided
/// differences of the observed prices on each side of the chain as a crude
/// density, matches a Gaussian to its first two moments and returns the
/// normalized log-masses of that Gaussian on the grid.
Eigen::VectorXd initial_eta(std::span<const OptionQuote> quotes,
                            const SupportGrid& grid, EtaInit init);

/// Penalized iteratively reweighted least squares at a fixed lambda.
///
/// Each outer iteration solves
///
///   (E'WE + lambda D'D) eta = E'W (c - mu + E eta~),   E = G diag(phi~),
///
/// and halves the step while the full Gauss-Newton step increases the
/// objective. With `constrained`, the bordered system carrying the linearized
/// sum-to-one condition is solved instead and every accepted iterate is
/// recentred so that sum(phi) == 1 exactly; the penalty is invariant under
/// that shift because D annihilates constants.
///
/// Non-convergence is not an error: the returned fit has converged == false.
/// Throws SingularSystem if the normal equations cannot be factorized.
SpdFit fit_fixed_lambda(std::span<const OptionQuote> quotes,
                        const SupportGrid& grid, const FitConfig& config,
                        double lambda, bool constrained,
                        const std::optional<Eigen::VectorXd>& eta_start = {});

/// Unconstrained fit; config.lambda_policy must be FixedLambda.
SpdFit fit_penalized_irls(std::span<const OptionQuote> quotes,
                          const SupportGrid& grid, const FitConfig& config);

/// Sum-to-one constrained fit; config.lambda_policy must be FixedLambda.
SpdFit fit_constrained(std::span<const OptionQuote> quotes,
                       const SupportGrid& grid, const FitConfig& config);

}  // namespace despd
