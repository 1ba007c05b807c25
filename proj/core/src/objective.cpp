#include "despd/objective.hpp"

#include "despd/errors.hpp"

namespace despd {
namespace {

void check(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
           const DesignMatrices& design) {
  if (design.payoff.cols() != eta.size() || design.payoff.rows() != prices.size() ||
      design.weights.size() != prices.size() || design.difference.cols() != eta.size()) {
    throw InvalidInput("objective: inconsistent dimensions");
  }
  if (!eta.allFinite()) throw NumericalError("objective: eta has non-finite entries");
}

}  // namespace

double weighted_rss(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                    const DesignMatrices& design) {
  check(eta, prices, design);
  const Eigen::VectorXd r = prices - design.payoff * eta.array().exp().matrix();
  return (design.weights.array() * r.array().square()).sum();
}

double objective(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                 const DesignMatrices& design, double lambda) {
  if (lambda < 0.0) throw InvalidInput("objective: lambda must be >= 0");
  const double rss = weighted_rss(eta, prices, design);
  return rss + lambda * (design.difference * eta).squaredNorm();
}

Eigen::VectorXd gradient(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                         const DesignMatrices& design, double lambda) {
  check(eta, prices, design);
  const Eigen::VectorXd phi = eta.array().exp();
  const Eigen::VectorXd e = design.payoff * phi - prices;
  const Eigen::VectorXd gtwe =
      design.payoff.transpose() * (design.weights.array() * e.array()).matrix();
  const Eigen::MatrixXd& dm = design.difference;
  return 2.0 * phi.cwiseProduct(gtwe) + 2.0 * lambda * (dm.transpose() * (dm * eta));
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                        const DesignMatrices& design, double lambda) {
  check(eta, prices, design);
  const Eigen::VectorXd phi = eta.array().exp();
  const Eigen::VectorXd e = design.payoff * phi - prices;
  const Eigen::VectorXd gtwe =
      design.payoff.transpose() * (design.weights.array() * e.array()).matrix();
  const Eigen::MatrixXd jac = design.payoff * phi.asDiagonal();
  Eigen::MatrixXd h = 2.0 * jac.transpose() * design.weights.asDiagonal() * jac;
  h.diagonal() += 2.0 * phi.cwiseProduct(gtwe);
  h += 2.0 * lambda * design.difference.transpose() * design.difference;
  return h;
}

}  // namespace despd
