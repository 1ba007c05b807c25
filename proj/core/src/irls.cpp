#include "despd/irls.hpp"

#include "despd/design.hpp"
#include "despd/errors.hpp"
#include "despd/objective.hpp"
#include "fit_statistics.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace despd {
namespace {

void recentre(Eigen::VectorXd& eta) {
  const double top = eta.maxCoeff();
  const double log_sum = top + std::log((eta.array() - top).exp().sum());
  eta.array() -= log_sum;
}

double safe_objective(const Eigen::VectorXd& eta, const Eigen::VectorXd& prices,
                      const DesignMatrices& design, double lambda) {
  if (!eta.allFinite() || eta.maxCoeff() > 700.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double s = objective(eta, prices, design, lambda);
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd weights_for(std::span<const OptionQuote> quotes, const FitConfig& config,
                            const Eigen::VectorXd& mu) {
  if (config.weighting == Weighting::Homoscedastic) {
    return Eigen::VectorXd::Ones(mu.size());
  }
  return price_strike_weights(quotes, mu);
}

// Second divided differences of one side of the chain, located at the middle
// strike of each triple.
void accumulate_curvature(std::vector<std::pair<double, double>> pts,
                          std::vector<std::pair<double, double>>& out) {
  std::sort(pts.begin(), pts.end());
  // Average duplicate strikes.
  std::vector<std::pair<double, double>> uniq;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
    uniq.emplace_back(pts[i].first, sum / static_cast<double>(j - i));
    i = j;
  }
  for (std::size_t i = 1; i + 1 < uniq.size(); ++i) {
    const auto [k0, c0] = uniq[i - 1];
    const auto [k1, c1] = uniq[i];
    const auto [k2, c2] = uniq[i + 1];
    const double dd = 2.0 * ((c2 - c1) / (k2 - k1) - (c1 - c0) / (k1 - k0)) / (k2 - k0);
    out.emplace_back(k1, std::max(dd, 0.0) * 0.5 * (k2 - k0));
  }
}

}  // namespace

Eigen::VectorXd initial_eta(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                            EtaInit init) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double flat = -std::log(static_cast<double>(m));
  if (init == EtaInit::FlatUniform) return Eigen::VectorXd::Constant(m, flat);

  std::vector<std::pair<double, double>> calls, puts, mass;
  for (const auto& q : quotes) {
    (q.side == OptionSide::Call ? calls : puts).emplace_back(q.strike, q.price);
  }
  accumulate_curvature(std::move(calls), mass);
  accumulate_curvature(std::move(puts), mass);

  double total = 0.0, first = 0.0;
  for (const auto& [k, w] : mass) {
    total += w;
    first += w * k;
  }
  const double range = grid.back() - grid.front();
  double mean = 0.5 * (grid.front() + grid.back());
  double var = (range / 6.0) * (range / 6.0);
  if (total > 0.0) {
    const double mu = first / total;
    double second = 0.0;
    for (const auto& [k, w] : mass) second += w * (k - mu) * (k - mu);
    mean = mu;
    if (second / total > 0.0) var = second / total;
  }
  var = std::max(var, 4.0 * grid.spacing() * grid.spacing());

  Eigen::VectorXd eta(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double z = grid[static_cast<std::size_t>(j)] - mean;
    eta(j) = -0.5 * z * z / var;
  }
  recentre(eta);
  return eta;
}

SpdFit fit_fixed_lambda(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                        const FitConfig& config, double lambda, bool constrained,
                        const std::optional<Eigen::VectorXd>& eta_start) {
  config.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("lambda must be positive and finite");
  }
  if (quotes.empty()) throw InvalidInput("fit needs at least one quote");
  for (const auto& q : quotes) q.validate();
  if (config.penalty_order >= static_cast<int>(grid.size())) {
    throw InvalidInput("penalty order must be smaller than the grid size");
  }

  SpdFit fit(grid);
  fit.penalty_order = config.penalty_order;
  fit.constrained = constrained;
  fit.lambda = lambda;

  DesignMatrices design = build_design(quotes, grid, config.penalty_order, &fit.warnings);
  const Eigen::VectorXd prices = observed_prices(quotes);
  const Eigen::MatrixXd penalty = design.difference.transpose() * design.difference;
  const Eigen::MatrixXd& g = design.payoff;

  Eigen::VectorXd eta = eta_start ? *eta_start : initial_eta(quotes, grid, config.eta_init);
  if (eta.size() != static_cast<Eigen::Index>(grid.size()) || !eta.allFinite()) {
    throw InvalidInput("starting eta does not match the grid");
  }
  if (constrained) recentre(eta);

  Eigen::VectorXd phi = eta.array().exp();
  Eigen::VectorXd mu = g * phi;
  design.weights = weights_for(quotes, config, mu);
  double s = safe_objective(eta, prices, design, lambda);
  if (!std::isfinite(s)) throw NumericalError("objective is not finite at the start");
  fit.trace.push_back({0, s, 1.0, 0});

  bool converged = false;
  int it = 0;
  while (it < config.irls_max_iter) {
    ++it;
    const Eigen::MatrixXd e = g * phi.asDiagonal();
    const Eigen::MatrixXd ew = design.weights.asDiagonal() * e;
    const Eigen::MatrixXd a = e.transpose() * ew + lambda * penalty;
    const Eigen::VectorXd rhs = ew.transpose() * (prices - mu + e * eta);

    Eigen::VectorXd target;
    if (constrained) {
      const double r = 1.0 - phi.sum() + phi.dot(eta);
      auto sol = detail::solve_bordered(a, phi, rhs, r, "constrained IRLS");
      target = std::move(sol.x);
      fit.lagrange_omega = sol.multiplier;
    } else {
      target = detail::solve_spd(a, rhs, "IRLS");
    }
    const Eigen::VectorXd delta = target - eta;

    double scale = 1.0;
    int halvings = 0;
    bool accepted = false;
    Eigen::VectorXd cand;
    double s_cand = s;
    for (; halvings <= config.step_halving_max; ++halvings) {
      cand = eta + scale * delta;
      if (constrained) recentre(cand);
      s_cand = safe_objective(cand, prices, design, lambda);
      if (s_cand <= s) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      // No descent along the Gauss-Newton direction: stationary to working
      // precision.
      fit.trace.push_back({it, s, 0.0, halvings});
      converged = true;
      break;
    }

    const double rel = (s - s_cand) / std::max(s_cand, std::numeric_limits<double>::min());
    eta = std::move(cand);
    phi = eta.array().exp();
    mu = g * phi;
    fit.trace.push_back({it, s_cand, scale, halvings});

    if (config.weighting != Weighting::Homoscedastic) {
      design.weights = weights_for(quotes, config, mu);
      s = safe_objective(eta, prices, design, lambda);
    } else {
      s = s_cand;
    }
    // A tiny change after heavy damping says nothing about stationarity, but
    // near the optimum the full step often overshoots by about a factor two.
    if (halvings <= 2 && rel <= config.irls_rel_tol) {
      converged = true;
      break;
    }
  }

  fit.quotes.assign(quotes.begin(), quotes.end());
  fit.payoff = g;
  fit.observed = prices;
  fit.eta = eta;
  fit.phi = phi;
  fit.fitted_prices = mu;
  fit.weights = design.weights;
  fit.objective = s;
  fit.iterations = it;
  fit.max_inner_iterations = it;
  fit.converged = converged;
  detail::populate_statistics(fit);
  return fit;
}

SpdFit fit_penalized_irls(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                          const FitConfig& config) {
  const auto* fixed = std::get_if<FixedLambda>(&config.lambda_policy);
  if (!fixed) throw InvalidInput("fit_penalized_irls needs a fixed lambda");
  return fit_fixed_lambda(quotes, grid, config, fixed->value, false);
}

SpdFit fit_constrained(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                       const FitConfig& config) {
  const auto* fixed = std::get_if<FixedLambda>(&config.lambda_policy);
  if (!fixed) throw InvalidInput("fit_constrained needs a fixed lambda");
  return fit_fixed_lambda(quotes, grid, config, fixed->value, true);
}

}  // namespace despd
