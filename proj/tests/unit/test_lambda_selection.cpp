#include "despd/errors.hpp"
#include "despd/irls.hpp"
#include "despd/lambda_selection.hpp"
#include "despd/sim/mixture.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace despd {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// In-the-money reference-mixture quotes (calls below 485, puts above) with
/// Gaussian noise of standard deviation s. Every price is far above s, so
/// the noise never produces a negative quote.
std::vector<OptionQuote> noisy_quotes(std::mt19937_64& rng, double s, double scale = 1.0) {
  std::normal_distribution<double> eps(0.0, s);
  const auto spec = sim::MixtureSpec::reference();
  std::vector<OptionQuote> q;
  for (double k : sim::reference_strikes()) {
    const bool call = k < 485.0;
    const double p = call ? sim::theoretical_call_price(spec, k) : sim::theoretical_put_price(spec, k);
    q.push_back({call ? OptionSide::Call : OptionSide::Put, scale * k, scale * (p + eps(rng)), {}, {}});
  }
  return q;
}

TEST(Schall, ResidualVarianceTracksTheGeneratingNoise) {
  std::mt19937_64 rng(41);
  const double s = 0.1;
  FitConfig cfg;
  std::vector<double> ratios;
  for (int rep = 0; rep < 100; ++rep) {
    const auto q = noisy_quotes(rng, s);
    const SpdFit f = select_lambda_schall(q, SupportGrid::covering(q, 80), cfg);
    ratios.push_back(f.sigma2 / (s * s));
  }
  const double m = median(ratios);
  EXPECT_GE(m, 0.5);
  EXPECT_LE(m, 2.0);
}

TEST(Schall, FittedPricesScaleWithTheProblem) {
  std::mt19937_64 rng(42);
  const auto base = noisy_quotes(rng, 0.1);
  std::vector<OptionQuote> doubled = base;
  for (auto& q : doubled) {
    q.strike *= 2.0;
    q.price *= 2.0;
  }
  FitConfig cfg;
  std::get<SchallEm>(cfg.lambda_policy).tol = 1e-8;
  std::get<SchallEm>(cfg.lambda_policy).max_iter = 200;
  cfg.irls_rel_tol = 1e-12;
  cfg.irls_max_iter = 200;
  const SpdFit a = select_lambda_schall(base, SupportGrid::covering(base, 100), cfg);
  const SpdFit b = select_lambda_schall(doubled, SupportGrid::covering(doubled, 100), cfg);
  EXPECT_LE((b.fitted_prices - 2.0 * a.fitted_prices).lpNorm<Eigen::Infinity>(),
            1e-4 * b.fitted_prices.maxCoeff());
  EXPECT_NEAR(b.lambda / a.lambda, 4.0, 4e-3);
}

TEST(Schall, PopulatesSelectionFields) {
  std::mt19937_64 rng(43);
  const auto q = noisy_quotes(rng, 0.1);
  const SpdFit f = fit(q, SupportGrid::covering(q, 100), FitConfig{});
  EXPECT_TRUE(f.converged);
  EXPECT_GT(f.selection_iterations, 0);
  EXPECT_GE(f.max_inner_iterations, f.iterations);
  EXPECT_NEAR(f.lambda, f.sigma2 / f.sigma2_random, 1e-3 * f.lambda * 1.01);
}

TEST(Schall, NeedsMoreQuotesThanOrderPlusOne) {
  std::vector<OptionQuote> q = {{OptionSide::Put, 100, 1, {}, {}},
                                {OptionSide::Put, 105, 2, {}, {}},
                                {OptionSide::Put, 110, 4, {}, {}},
                                {OptionSide::Put, 115, 7, {}, {}}};
  EXPECT_THROW(select_lambda_schall(q, SupportGrid::uniform(80, 140, 30), FitConfig{}),
               InvalidInput);
}

TEST(Schall, DegenerateWhenNoQuoteSeesTheGrid) {
  // Calls struck above the whole grid have zero payoff rows, so ED is zero.
  std::vector<OptionQuote> q;
  for (int i = 0; i < 6; ++i) q.push_back({OptionSide::Call, 200.0 + i, 0.0, {}, {}});
  EXPECT_THROW(select_lambda_schall(q, SupportGrid::uniform(80, 140, 30), FitConfig{}),
               DegenerateVariance);
}

TEST(Aic, SingleGridPointEqualsFixedLambda) {
  std::mt19937_64 rng(44);
  const auto q = noisy_quotes(rng, 0.1);
  const auto grid = SupportGrid::covering(q, 100);
  FitConfig aic_cfg;
  aic_cfg.lambda_policy = AicGrid{{3.0}};
  FitConfig fixed_cfg;
  fixed_cfg.lambda_policy = FixedLambda{1e3};
  const auto sel = select_lambda_aic(q, grid, aic_cfg);
  const SpdFit ref = fit(q, grid, fixed_cfg);
  ASSERT_EQ(sel.profile.size(), 1u);
  EXPECT_LE((sel.best.eta - ref.eta).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_DOUBLE_EQ(sel.profile[0].aic, aic(ref));
}

TEST(Aic, MinimumIsInteriorOnSimulatedData) {
  std::mt19937_64 rng(45);
  const auto q = noisy_quotes(rng, 0.1);
  FitConfig cfg;
  cfg.lambda_policy = AicGrid::linspace(-2, 10, 25);
  const auto sel = select_lambda_aic(q, SupportGrid::covering(q, 100), cfg);
  ASSERT_EQ(sel.profile.size(), 25u);
  const auto best = std::min_element(sel.profile.begin(), sel.profile.end(),
                                     [](const AicPoint& a, const AicPoint& b) { return a.aic < b.aic; });
  EXPECT_GT(best - sel.profile.begin(), 0);
  EXPECT_LT(best - sel.profile.begin(), 24);
  EXPECT_DOUBLE_EQ(best->lambda, sel.best.lambda);
  for (std::size_t i = 1; i < sel.profile.size(); ++i) {
    EXPECT_LT(sel.profile[i - 1].log10_lambda, sel.profile[i].log10_lambda);
  }
}

TEST(Aic, AgreesWithSchallInOrderOfMagnitude) {
  std::vector<double> gaps;
  for (std::uint64_t rep = 0; rep < 11; ++rep) {
    const auto q = sim::generate_replicate(sim::MixtureSpec::reference(), sim::reference_strikes(),
                                           {sim::NoiseScale::Full, sim::derive_seed(46, rep)});
    const auto grid = SupportGrid::covering(q, 80);
    FitConfig a;
    a.lambda_policy = AicGrid::linspace(-2, 10, 49);
    const double la = select_lambda_aic(q, grid, a).best.lambda;
    const double ls = select_lambda_schall(q, grid, FitConfig{}).lambda;
    gaps.push_back(std::abs(std::log10(la) - std::log10(ls)));
  }
  EXPECT_LE(median(gaps), 1.0);
}

TEST(Aic, FormulaIsGaussianWithEffectiveDimension) {
  std::mt19937_64 rng(47);
  const auto q = noisy_quotes(rng, 0.1);
  FitConfig cfg;
  cfg.lambda_policy = FixedLambda{100.0};
  const SpdFit f = fit(q, SupportGrid::covering(q, 60), cfg);
  const Eigen::VectorXd r = f.observed - f.fitted_prices;
  const double n = static_cast<double>(r.size());
  EXPECT_NEAR(aic(f), n * std::log(r.squaredNorm() / n) + 2.0 * f.effective_dimension, 1e-10);
}

TEST(Aic, PolicyIsRequired) {
  std::mt19937_64 rng(48);
  const auto q = noisy_quotes(rng, 0.1);
  EXPECT_THROW(select_lambda_aic(q, SupportGrid::covering(q, 60), FitConfig{}), InvalidInput);
  FitConfig empty;
  empty.lambda_policy = AicGrid{};
  EXPECT_THROW(fit(q, SupportGrid::covering(q, 60), empty), InvalidInput);
}

}  // namespace
}  // namespace despd
