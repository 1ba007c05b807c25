#include "despd/lambda_selection.hpp"

#include "despd/errors.hpp"
#include "despd/irls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace despd {
namespace {

constexpr double kLambdaMin = 1e-8;
constexpr double kLambdaMax = 1e12;

double clamp_lambda(double lambda) {
  if (std::isnan(lambda)) return kLambdaMax;
  return std::clamp(lambda, kLambdaMin, kLambdaMax);
}

}  // namespace

SpdFit select_lambda_schall(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                            const FitConfig& config) {
  config.validate();
  const auto* em = std::get_if<SchallEm>(&config.lambda_policy);
  if (!em) throw InvalidInput("select_lambda_schall needs a SchallEm policy");
  const int d = config.penalty_order;
  const double n = static_cast<double>(quotes.size());
  if (!(n > d + 1)) {
    throw InvalidInput("Schall selection needs more than d + 1 quotes");
  }

  double lambda = clamp_lambda(em->initial);
  std::optional<Eigen::VectorXd> start;
  std::optional<SpdFit> best;
  std::vector<double> lambdas;
  int max_inner = 0;

  for (int iter = 1; iter <= em->max_iter; ++iter) {
    SpdFit fit =
        fit_fixed_lambda(quotes, grid, config, lambda, config.constrain_sum_to_one, start);
    lambdas.push_back(lambda);
    max_inner = std::max(max_inner, fit.iterations);
    start = fit.eta;

    const double ed = fit.effective_dimension;
    if (ed - d <= 1e-6 || n - ed <= 0.0) {
      std::ostringstream msg;
      msg << "variance components degenerate at lambda " << lambda << " (ED " << ed << ")";
      throw DegenerateVariance(msg.str(), lambdas);
    }
    const double next = clamp_lambda(fit.sigma2 / fit.sigma2_random);
    const double rel = std::abs(next - lambda) / lambda;

    fit.selection_iterations = iter;
    fit.max_inner_iterations = max_inner;
    if (rel <= em->tol) {
      return fit;
    }
    if (!best || fit.objective < best->objective) best = std::move(fit);
    lambda = next;
  }

  best->converged = false;
  best->selection_iterations = em->max_iter;
  best->max_inner_iterations = max_inner;
  return *best;
}

double aic(const SpdFit& fit) {
  const double n = static_cast<double>(fit.observed.size());
  const Eigen::VectorXd r = fit.observed - fit.fitted_prices;
  const double rss = (fit.weights.array() * r.array().square()).sum();
  return n * std::log(rss / n) + 2.0 * fit.effective_dimension;
}

AicSelection select_lambda_aic(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                               const FitConfig& config) {
  config.validate();
  const auto* policy = std::get_if<AicGrid>(&config.lambda_policy);
  if (!policy) throw InvalidInput("select_lambda_aic needs an AicGrid policy");

  const auto& grid_lg = policy->log10_lambdas;
  std::vector<AicPoint> profile(grid_lg.size());
  std::vector<std::string> failures;
  std::optional<SpdFit> best;
  std::optional<Eigen::VectorXd> start;
  int max_inner = 0;

  // Sweep from the smoothest fit down; rough fits converge slowly from a
  // cold start but quickly from a smoother neighbour.
  std::vector<std::size_t> order(grid_lg.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid_lg[a] > grid_lg[b]; });

  const auto better = [](const SpdFit& cand, double cand_aic, const SpdFit& cur) {
    if (cand.converged != cur.converged) return cand.converged;
    return cand_aic < aic(cur);
  };

  for (std::size_t idx : order) {
    AicPoint& point = profile[idx];
    point.log10_lambda = grid_lg[idx];
    point.lambda = std::pow(10.0, point.log10_lambda);
    try {
      SpdFit fit = fit_fixed_lambda(quotes, grid, config, point.lambda,
                                    config.constrain_sum_to_one, start);
      start = fit.eta;
      max_inner = std::max(max_inner, fit.iterations);
      point.aic = aic(fit);
      point.effective_dimension = fit.effective_dimension;
      point.weighted_rss =
          (fit.weights.array() * (fit.observed - fit.fitted_prices).array().square()).sum();
      point.iterations = fit.iterations;
      point.converged = fit.converged;
      if (!best || better(fit, point.aic, *best)) best = std::move(fit);
    } catch (const Error& e) {
      point.error = e.what();
      std::ostringstream msg;
      msg << "lambda " << point.lambda << ": " << e.what();
      failures.push_back(msg.str());
    }
  }
  if (!best) {
    throw AggregateFitError("every lambda of the AIC grid failed", std::move(failures));
  }
  best->selection_iterations = static_cast<int>(policy->log10_lambdas.size());
  best->max_inner_iterations = max_inner;
  return {std::move(*best), std::move(profile)};
}

SpdFit fit(std::span<const OptionQuote> quotes, const SupportGrid& grid,
           const FitConfig& config) {
  config.validate();
  if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda_policy)) {
    return fit_fixed_lambda(quotes, grid, config, fixed->value, config.constrain_sum_to_one);
  }
  if (std::holds_alternative<SchallEm>(config.lambda_policy)) {
    return select_lambda_schall(quotes, grid, config);
  }
  return select_lambda_aic(quotes, grid, config).best;
}

}  // namespace despd
