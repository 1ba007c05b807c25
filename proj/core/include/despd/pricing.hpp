#pragma once

#include "despd/types.hpp"

#include <Eigen/Dense>

#include <span>

namespace despd {

struct ContractSpec {
  OptionSide side = OptionSide::Call;
  double strike = 0.0;
};

/// Expected payoff of one contract under the masses `phi` on `grid`.
double expected_payoff(const SupportGrid& grid, const Eigen::VectorXd& phi,
                       OptionSide side, double strike);

/// Prices of arbitrary contracts under a fitted SPD. Throws InvalidInput on
/// non-positive strikes.
Eigen::VectorXd price_chain(const SpdFit& fit,
                            std::span<const ContractSpec> contracts);

/// sum_j u_j phi_j, the forward implied by the fit.
double implied_forward(const SpdFit& fit);

}  // namespace despd
