#include "despd/pricing.hpp"

#include "despd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace despd {

double expected_payoff(const SupportGrid& grid, const Eigen::VectorXd& phi, OptionSide side,
                       double strike) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw InvalidInput("strike must be positive");
  }
  if (phi.size() != static_cast<Eigen::Index>(grid.size())) {
    throw InvalidInput("masses do not match the grid");
  }
  double price = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid[j];
    const double payoff = side == OptionSide::Call ? std::max(u - strike, 0.0)
                                                   : std::max(strike - u, 0.0);
    price += payoff * phi(static_cast<Eigen::Index>(j));
  }
  return price;
}

Eigen::VectorXd price_chain(const SpdFit& fit, std::span<const ContractSpec> contracts) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(contracts.size()));
  for (std::size_t i = 0; i < contracts.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) =
        expected_payoff(fit.grid, fit.phi, contracts[i].side, contracts[i].strike);
  }
  return out;
}

double implied_forward(const SpdFit& fit) { return fit.grid.as_vector().dot(fit.phi); }

}  // namespace despd
