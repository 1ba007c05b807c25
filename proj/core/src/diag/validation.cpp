#include "despd/diag/validation.hpp"

#include "despd/errors.hpp"
#include "despd/irls.hpp"
#include "despd/lambda_selection.hpp"
#include "despd/normal.hpp"
#include "despd/pricing.hpp"
#include "despd/sim/mixture.hpp"
#include "../parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace despd::diag {

LoocvResult loocv_rmse(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                       const FitConfig& config, const LoocvOptions& options) {
  if (quotes.size() < 3) throw InvalidInput("LOOCV needs at least three quotes");
  return loocv_rmse(despd::fit(quotes, grid, config), config, options);
}

LoocvResult loocv_rmse(const SpdFit& full_fit, const FitConfig& config,
                       const LoocvOptions& options) {
  const auto& quotes = full_fit.quotes;
  const std::size_t n = quotes.size();
  if (n < 3) throw InvalidInput("LOOCV needs at least three quotes");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  LoocvResult result;
  result.folds = static_cast<int>(n);
  result.predictions.assign(n, nan);
  std::vector<std::string> errors(n);

  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    std::vector<OptionQuote> train;
    train.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) train.push_back(quotes[j]);
    }
    try {
      const SpdFit fold =
          options.reselect_lambda
              ? despd::fit(train, full_fit.grid, config)
              : fit_fixed_lambda(train, full_fit.grid, config, full_fit.lambda,
                                 config.constrain_sum_to_one, full_fit.eta);
      result.predictions[i] =
          expected_payoff(fold.grid, fold.phi, quotes[i].side, quotes[i].strike);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  double sse = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      ++result.failed_folds;
      result.failures.push_back("fold " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    const double r = quotes[i].price - result.predictions[i];
    sse += r * r;
    ++used;
  }
  result.rmse = used > 0 ? std::sqrt(sse / used) : nan;
  return result;
}

FittedCdf::FittedCdf(const SupportGrid& grid, const Eigen::VectorXd& phi) : grid_(grid) {
  if (phi.size() != static_cast<Eigen::Index>(grid.size())) {
    throw InvalidInput("CDF: masses do not match the grid");
  }
  const double total = phi.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidInput("CDF: masses must be positive");
  cumulative_.resize(grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    acc += phi(static_cast<Eigen::Index>(j));
    cumulative_[j] = acc / total;
  }
  cumulative_.back() = 1.0;

  // Near the median the CDF moves by several ulps of 0.5 per ulp of x, so no
  // double hits 0.5 under the plain interpolation. Inside the median's
  // bracket the CDF is evaluated from the median instead.
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), 0.5);
  if (it != cumulative_.begin() && *it > 0.5) {
    anchor_bracket_ = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const std::size_t j = anchor_bracket_;
    anchor_slope_ = (cumulative_[j + 1] - cumulative_[j]) / grid_.spacing();
    anchor_ = grid_[j] + (0.5 - cumulative_[j]) / anchor_slope_;
  }
}

double FittedCdf::operator()(double x) const {
  if (x < grid_.front()) return 0.0;
  if (x >= grid_.back()) return 1.0;
  const double pos = (x - grid_.front()) / grid_.spacing();
  const auto j = std::min(static_cast<std::size_t>(pos), grid_.size() - 2);
  if (anchor_ && j == anchor_bracket_) {
    return std::clamp(0.5 + (x - *anchor_) * anchor_slope_, cumulative_[j], cumulative_[j + 1]);
  }
  const double t = pos - static_cast<double>(j);
  return cumulative_[j] + t * (cumulative_[j + 1] - cumulative_[j]);
}

double FittedCdf::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("CDF quantile needs p in [0, 1]");
  if (p <= cumulative_.front()) return grid_.front();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto j = static_cast<std::size_t>(it - cumulative_.begin());
  const double lo = cumulative_[j - 1];
  const double hi = cumulative_[j];
  double x = grid_[j - 1] + (p - lo) / (hi - lo) * grid_.spacing();
  // Walk a few ulps so that the forward evaluation hits p exactly.
  for (int step = 0; step < 256; ++step) {
    const double fx = (*this)(x);
    if (fx == p) break;
    if (fx < p) {
      x = std::nextafter(x, std::numeric_limits<double>::infinity());
    } else {
      const double prev = std::nextafter(x, -std::numeric_limits<double>::infinity());
      if ((*this)(prev) < p) break;
      x = prev;
    }
  }
  return x;
}

std::vector<PitRecord> pit_series(const FittedCdf& cdf, std::span<const Realization> realizations) {
  std::vector<PitRecord> out;
  out.reserve(realizations.size());
  const auto& grid = cdf.grid();
  for (const auto& r : realizations) {
    if (!(r.price > 0.0) || !std::isfinite(r.price)) {
      throw InvalidInput("realized prices must be positive");
    }
    PitRecord rec;
    rec.observation_time = r.date;
    rec.realized_price = r.price;
    rec.z = cdf(r.price);
    const bool outside = r.price < grid.front() || r.price > grid.back();
    rec.saturated = outside || rec.z < kPitSaturation || rec.z > 1.0 - kPitSaturation;
    rec.x = rec.saturated ? std::numeric_limits<double>::quiet_NaN() : normal_quantile(rec.z);
    out.push_back(rec);
  }
  return out;
}

std::vector<PitRecord> pit_series(const SpdFit& fit, std::span<const Realization> realizations) {
  return pit_series(FittedCdf(fit.grid, fit.phi), realizations);
}

double ks_uniform_distance(std::vector<double> sample) {
  if (sample.empty()) throw InvalidInput("KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return 1.6276 / (sn + 0.12 + 0.11 / sn);
}

std::vector<QqPoint> qq_envelope(std::span<const double> xs, int n_sim, double level,
                                 std::uint64_t seed) {
  if (xs.empty()) throw InvalidInput("QQ data needs at least one value");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("QQ envelope level must be in (0, 1)");
  if (n_sim < 2) throw InvalidInput("QQ envelope needs at least two simulations");
  for (double x : xs) {
    if (!std::isfinite(x)) throw InvalidInput("QQ values must be finite");
  }
  const std::size_t n = xs.size();
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  sim::UniformStream stream(seed);
  std::vector<double> draw(n);
  for (int s = 0; s < n_sim; ++s) {
    for (auto& v : draw) {
      // Midpoint of the 2^-53 cell keeps the draw strictly inside (0, 1).
      v = normal_quantile(stream.next() + 0x1.0p-54);
    }
    std::sort(draw.begin(), draw.end());
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += draw[i];
      sum_sq[i] += draw[i] * draw[i];
    }
  }

  const double zq = normal_quantile(0.5 * (1.0 + level));
  const double ns = static_cast<double>(n_sim);
  std::vector<QqPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / ns;
    const double var = std::max(0.0, (sum_sq[i] - ns * mean * mean) / (ns - 1.0));
    const double theo = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    const double half = zq * std::sqrt(var);
    out[i] = {theo, sorted[i], theo - half, theo + half};
  }
  return out;
}

}  // namespace despd::diag
