#include "despd/design.hpp"

#include "despd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace despd {

Eigen::MatrixXd build_payoff_matrix(std::span<const OptionQuote> quotes,
                                    const SupportGrid& grid,
                                    std::vector<std::string>* warnings) {
  if (quotes.empty()) throw InvalidInput("payoff matrix needs at least one quote");
  const auto n = static_cast<Eigen::Index>(quotes.size());
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd g(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const OptionQuote& q = quotes[static_cast<std::size_t>(i)];
    const double k = q.strike;
    if (warnings && (k < grid.front() || k > grid.back())) {
      std::ostringstream msg;
      msg << "strike " << k << " outside support [" << grid.front() << ", "
          << grid.back() << "]";
      warnings->push_back(msg.str());
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = grid[static_cast<std::size_t>(j)];
      g(i, j) = q.side == OptionSide::Call ? std::max(u - k, 0.0) : std::max(k - u, 0.0);
    }
  }
  return g;
}

Eigen::MatrixXd build_difference_matrix(int m, int d) {
  if (d < 1 || d >= m) {
    throw InvalidInput("difference order must satisfy 1 <= d < m");
  }
  // Signed binomials of (x - 1)^d, lowest power first.
  std::vector<double> coef(static_cast<std::size_t>(d) + 1);
  double c = 1.0;
  for (int r = 0; r <= d; ++r) {
    coef[static_cast<std::size_t>(r)] = ((d - r) % 2 == 0 ? 1.0 : -1.0) * c;
    c = c * (d - r) / (r + 1);
  }
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(m - d, m);
  for (int row = 0; row < m - d; ++row) {
    for (int r = 0; r <= d; ++r) dm(row, row + r) = coef[static_cast<std::size_t>(r)];
  }
  return dm;
}

Eigen::VectorXd price_strike_weights(std::span<const OptionQuote> quotes,
                                     const Eigen::VectorXd& fitted_prices) {
  const auto n = static_cast<Eigen::Index>(quotes.size());
  if (fitted_prices.size() != n) throw InvalidInput("weights: size mismatch");
  const double floor = 1e-8 * std::max(fitted_prices.maxCoeff(), 1e-300);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = quotes[static_cast<std::size_t>(i)].strike / std::max(fitted_prices(i), floor);
  }
  return w;
}

DesignMatrices build_design(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                            int penalty_order, std::vector<std::string>* warnings) {
  DesignMatrices design;
  design.payoff = build_payoff_matrix(quotes, grid, warnings);
  design.difference = build_difference_matrix(static_cast<int>(grid.size()), penalty_order);
  design.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(quotes.size()));
  return design;
}

Eigen::VectorXd observed_prices(std::span<const OptionQuote> quotes) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(quotes.size()));
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    c(static_cast<Eigen::Index>(i)) = quotes[i].price;
  }
  return c;
}

}  // namespace despd
