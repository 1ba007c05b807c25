#include "despd/uncertainty.hpp"

#include "despd/design.hpp"
#include "despd/errors.hpp"
#include "fit_statistics.hpp"
#include "linalg.hpp"

#include <cmath>
#include <limits>

namespace despd {

Eigen::MatrixXd LinearizedSystem::normal_matrix() const {
  return jacobian.transpose() * weights.asDiagonal() * jacobian + lambda * penalty;
}

LinearizedSystem linearize(const SpdFit& fit) {
  if (fit.phi.size() != fit.payoff.cols() || fit.weights.size() != fit.payoff.rows()) {
    throw InvalidInput("fit carries no linearization");
  }
  const Eigen::MatrixXd dm =
      build_difference_matrix(static_cast<int>(fit.grid.size()), fit.penalty_order);
  return {fit.payoff * fit.phi.asDiagonal(), fit.weights, dm.transpose() * dm, fit.lambda};
}

Eigen::MatrixXd hat_matrix(const LinearizedSystem& system) {
  const Eigen::MatrixXd ainv = detail::inverse_spd(system.normal_matrix(), "hat matrix");
  return system.jacobian * ainv * system.jacobian.transpose() * system.weights.asDiagonal();
}

double hat_matrix_trace(const LinearizedSystem& system) {
  const Eigen::MatrixXd etwe =
      system.jacobian.transpose() * system.weights.asDiagonal() * system.jacobian;
  const auto llt = detail::factorize_spd(etwe + system.lambda * system.penalty, "hat trace");
  return llt.solve(etwe).trace();
}

double hat_matrix_trace(const SpdFit& fit) { return hat_matrix_trace(linearize(fit)); }

Eigen::MatrixXd penalized_inverse(const SpdFit& fit, double lambda) {
  LinearizedSystem system = linearize(fit);
  system.lambda = lambda;
  return detail::inverse_spd(system.normal_matrix(), "covariance");
}

Eigen::MatrixXd covariance_eta(const SpdFit& fit) {
  return fit.sigma2 * penalized_inverse(fit, fit.lambda);
}

Eigen::MatrixXd covariance_phi(const SpdFit& fit) {
  const Eigen::MatrixXd& cov = fit.covariance_eta.size() > 0 ? fit.covariance_eta
                                                             : covariance_eta(fit);
  Eigen::MatrixXd out = fit.phi.asDiagonal() * cov * fit.phi.asDiagonal();
  return 0.5 * (out + out.transpose());
}

namespace detail {

void populate_statistics(SpdFit& fit) {
  const LinearizedSystem system = linearize(fit);
  const Eigen::MatrixXd etwe =
      system.jacobian.transpose() * system.weights.asDiagonal() * system.jacobian;
  const Eigen::MatrixXd ainv = inverse_spd(etwe + fit.lambda * system.penalty, "covariance");
  fit.effective_dimension = (ainv * etwe).trace();

  const double n = static_cast<double>(fit.payoff.rows());
  const Eigen::VectorXd r = fit.observed - fit.fitted_prices;
  const double rss = (fit.weights.array() * r.array().square()).sum();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double resid_df = n - fit.effective_dimension;
  fit.sigma2 = resid_df > 0.0 ? rss / resid_df : nan;
  const double penalty_df = fit.effective_dimension - fit.penalty_order;
  fit.sigma2_random = penalty_df > 0.0 ? fit.eta.dot(system.penalty * fit.eta) / penalty_df
                                       : nan;
  fit.covariance_eta = fit.sigma2 * ainv;
}

}  // namespace detail
}  // namespace despd
