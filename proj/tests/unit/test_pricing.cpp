#include "despd/errors.hpp"
#include "despd/irls.hpp"
#include "despd/pricing.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace despd {
namespace {

const SupportGrid kGrid(std::vector<double>{90, 100, 110, 120});

TEST(Pricing, PointMassGivesIntrinsicValue) {
  Eigen::VectorXd phi(4);
  phi << 0, 0, 1, 0;
  EXPECT_DOUBLE_EQ(expected_payoff(kGrid, phi, OptionSide::Call, 100), 10.0);
  EXPECT_DOUBLE_EQ(expected_payoff(kGrid, phi, OptionSide::Put, 100), 0.0);
  EXPECT_DOUBLE_EQ(expected_payoff(kGrid, phi, OptionSide::Put, 113.5), 3.5);
}

TEST(Pricing, UniformMassIsAverage) {
  const SupportGrid grid3(std::vector<double>{90, 100, 110, 120});
  Eigen::VectorXd phi(4);
  phi << 1.0 / 3, 1.0 / 3, 1.0 / 3, 0;
  EXPECT_NEAR(expected_payoff(grid3, phi, OptionSide::Call, 100), 10.0 / 3.0, 1e-15);
}

TEST(Pricing, ChainPricesAndParityOnConstrainedFit) {
  std::mt19937_64 rng(51);
  auto in = oracle::random_instance(rng, 9, 30, 3, 0.5);
  FitConfig cfg;
  cfg.lambda_policy = FixedLambda{1.0};
  const SpdFit f = fit_constrained(in.quotes, in.grid, cfg);
  const double fwd = implied_forward(f);
  EXPECT_NEAR(fwd, f.grid.as_vector().dot(f.phi), 1e-12);
  std::vector<ContractSpec> specs;
  for (double k = 70; k <= 130; k += 0.37) {
    specs.push_back({OptionSide::Call, k});
    specs.push_back({OptionSide::Put, k});
  }
  const Eigen::VectorXd p = price_chain(f, specs);
  for (std::size_t i = 0; i < specs.size(); i += 2) {
    const double k = specs[i].strike;
    EXPECT_NEAR(p(static_cast<Eigen::Index>(i)) - p(static_cast<Eigen::Index>(i + 1)) + k, fwd,
                1e-8);
  }
  // Observed contracts reprice to the stored fitted prices.
  std::vector<ContractSpec> observed;
  for (const auto& q : in.quotes) observed.push_back({q.side, q.strike});
  EXPECT_LE((price_chain(f, observed) - f.fitted_prices).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Pricing, RejectsNonPositiveStrike) {
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(4, 0.25);
  EXPECT_THROW(expected_payoff(kGrid, phi, OptionSide::Call, 0.0), InvalidInput);
  EXPECT_THROW(expected_payoff(kGrid, Eigen::VectorXd::Ones(3), OptionSide::Call, 1.0),
               InvalidInput);
}

}  // namespace
}  // namespace despd
