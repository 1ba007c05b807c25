#pragma once

#include "despd/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace despd {

/// n x m matrix of payoffs at maturity: (u_j - k_i)^+ for calls and
/// (k_i - u_j)^+ for puts. Strikes outside the grid are reported through
/// `warnings` when it is non-null.
Eigen::MatrixXd build_payoff_matrix(std::span<const OptionQuote> quotes,
                                    const SupportGrid& grid,
                                    std::vector<std::string>* warnings = nullptr);

/// (m - d) x m forward-difference operator of order d. Row r holds the signed
/// binomial coefficients of the d-th difference starting at column r.
Eigen::MatrixXd build_difference_matrix(int m, int d);

/// Inverse price/strike ratio k_i / mu_i. Fitted prices are floored at
/// 1e-8 * max(mu) before dividing.
Eigen::VectorXd price_strike_weights(std::span<const OptionQuote> quotes,
                                     const Eigen::VectorXd& fitted_prices);

/// G and D for a chain with unit weights.
DesignMatrices build_design(std::span<const OptionQuote> quotes,
                            const SupportGrid& grid, int penalty_order,
                            std::vector<std::string>* warnings = nullptr);

Eigen::VectorXd observed_prices(std::span<const OptionQuote> quotes);

}  // namespace despd
