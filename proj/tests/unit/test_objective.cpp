#include "despd/design.hpp"
#include "despd/errors.hpp"
#include "despd/objective.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace despd {
namespace {

DesignMatrices design_of(const oracle::Instance& in) {
  return {in.g, oracle::difference(static_cast<int>(in.grid.size()), in.d), in.w};
}

TEST(Objective, HandEvaluatedSingleQuote) {
  DesignMatrices dm;
  dm.payoff = Eigen::MatrixXd(1, 3);
  dm.payoff << 0, 5, 15;
  dm.difference = build_difference_matrix(3, 1);
  dm.weights = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd eta = Eigen::VectorXd::Constant(3, std::log(1.0 / 3.0));
  Eigen::VectorXd c(1);
  c << 5.0;
  EXPECT_NEAR(objective(eta, c, dm, 0.0), 25.0 / 9.0, 1e-13);
}

TEST(Objective, ZeroAtExactFitWithFlatLogMasses) {
  std::mt19937_64 rng(3);
  auto in = oracle::random_instance(rng, 5, 8, 2, 0.0);
  const Eigen::VectorXd eta = Eigen::VectorXd::Constant(8, std::log(0.125));
  const Eigen::VectorXd c = in.g * eta.array().exp().matrix();
  EXPECT_NEAR(objective(eta, c, design_of(in), 7.0), 0.0, 1e-24);
}

TEST(Objective, LambdaZeroIsWeightedRss) {
  std::mt19937_64 rng(4);
  auto in = oracle::random_instance(rng, 6, 9, 3, 0.5, true, true);
  Eigen::VectorXd eta = Eigen::VectorXd::Random(9);
  const auto dm = design_of(in);
  EXPECT_DOUBLE_EQ(objective(eta, in.c, dm, 0.0), weighted_rss(eta, in.c, dm));
  EXPECT_NEAR(objective(eta, in.c, dm, 0.0), static_cast<double>(oracle::objective(in, eta, 0.0)),
              1e-10 * objective(eta, in.c, dm, 0.0));
}

TEST(Objective, NonFiniteEtaRaises) {
  std::mt19937_64 rng(5);
  auto in = oracle::random_instance(rng, 4, 6, 2, 0.0);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(6);
  eta(2) = std::nan("");
  EXPECT_THROW(objective(eta, in.c, design_of(in), 1.0), NumericalError);
  EXPECT_THROW(gradient(eta, in.c, design_of(in), 1.0), NumericalError);
}

TEST(Objective, NegativeLambdaAndShapeMismatchRejected) {
  std::mt19937_64 rng(6);
  auto in = oracle::random_instance(rng, 4, 6, 2, 0.0);
  const Eigen::VectorXd eta = Eigen::VectorXd::Zero(6);
  EXPECT_THROW(objective(eta, in.c, design_of(in), -1.0), InvalidInput);
  EXPECT_THROW(objective(Eigen::VectorXd::Zero(5), in.c, design_of(in), 1.0), InvalidInput);
}

TEST(Gradient, PenaltyPartVanishesAtZero) {
  DesignMatrices dm;
  dm.payoff = Eigen::MatrixXd::Zero(1, 3);
  dm.difference = build_difference_matrix(3, 1);
  dm.weights = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(1);
  EXPECT_EQ(gradient(Eigen::VectorXd::Zero(3), c, dm, 2.0), Eigen::VectorXd::Zero(3));
}

TEST(Gradient, MatchesFiniteDifferencesOnRandomInstance) {
  std::mt19937_64 rng(11);
  auto in = oracle::random_instance(rng, 5, 8, 3, 0.3, true, true);
  Eigen::VectorXd eta = oracle::normalize_log(Eigen::VectorXd::Random(8));
  const double lambda = 3.0;
  const auto f = [&](const Eigen::VectorXd& x) { return oracle::objective(in, x, lambda); };
  const Eigen::VectorXd fd = oracle::fd_gradient(f, eta);
  const Eigen::VectorXd an = gradient(eta, in.c, design_of(in), lambda);
  const double floor = 1e-6 * fd.lpNorm<Eigen::Infinity>();
  for (Eigen::Index j = 0; j < 8; ++j) {
    EXPECT_LE(std::abs(an(j) - fd(j)) / std::max(std::abs(fd(j)), floor), 1e-5) << "j=" << j;
  }
}

TEST(Hessian, SymmetricAndMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  auto in = oracle::random_instance(rng, 6, 7, 2, 0.3);
  Eigen::VectorXd eta = oracle::normalize_log(Eigen::VectorXd::Random(7));
  const double lambda = 0.7;
  const auto h = hessian(eta, in.c, design_of(in), lambda);
  EXPECT_LE((h - h.transpose()).lpNorm<Eigen::Infinity>(), 0.0);
  const auto f = [&](const Eigen::VectorXd& x) { return oracle::objective(in, x, lambda); };
  const Eigen::MatrixXd fd = oracle::fd_hessian(f, eta);
  const double floor = 1e-6 * fd.lpNorm<Eigen::Infinity>();
  for (Eigen::Index a = 0; a < 7; ++a) {
    for (Eigen::Index b = 0; b < 7; ++b) {
      EXPECT_LE(std::abs(h(a, b) - fd(a, b)) / std::max(std::abs(fd(a, b)), floor), 1e-5);
    }
  }
}

}  // namespace
}  // namespace despd
