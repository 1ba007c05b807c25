#include "linalg.hpp"

#include "despd/errors.hpp"

#include <cmath>
#include <string>

namespace despd::detail {

Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& a, const char* context) {
  if (!a.allFinite()) {
    throw SingularSystem(std::string(context) + ": matrix has non-finite entries");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double ridge = 1e-10 * std::max(1.0, a.diagonal().maxCoeff());
  Eigen::MatrixXd bumped = a;
  bumped.diagonal().array() += ridge;
  llt.compute(bumped);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem(std::string(context) + ": matrix is not positive definite");
  }
  return llt;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const char* context) {
  Eigen::VectorXd x = factorize_spd(a, context).solve(b);
  if (!x.allFinite()) throw SingularSystem(std::string(context) + ": solution not finite");
  return x;
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& a, const char* context) {
  Eigen::MatrixXd inv =
      factorize_spd(a, context).solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  if (!inv.allFinite()) throw SingularSystem(std::string(context) + ": inverse not finite");
  return 0.5 * (inv + inv.transpose());
}

BorderedSolution solve_bordered(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& b, double r, const char* context) {
  const auto llt = factorize_spd(a, context);
  const Eigen::VectorXd ainv_b = llt.solve(b);
  const Eigen::VectorXd ainv_c = llt.solve(c);
  const double schur = c.dot(ainv_c);
  if (!(schur > 0.0) || !std::isfinite(schur)) {
    throw SingularSystem(std::string(context) + ": bordered system is singular");
  }
  BorderedSolution out;
  out.multiplier = (c.dot(ainv_b) - r) / schur;
  out.x = ainv_b - out.multiplier * ainv_c;
  if (!out.x.allFinite()) {
    throw SingularSystem(std::string(context) + ": bordered solution not finite");
  }
  return out;
}

}  // namespace despd::detail
