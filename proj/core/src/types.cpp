#include "despd/types.hpp"

#include "despd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace despd {

std::string_view to_string(OptionSide side) {
  return side == OptionSide::Call ? "call" : "put";
}

void OptionQuote::validate() const {
  if (!(std::isfinite(strike) && strike > 0.0)) {
    throw InvalidInput("strike must be positive, got " + std::to_string(strike));
  }
  if (!(std::isfinite(price) && price >= 0.0)) {
    throw InvalidInput("price must be non-negative, got " + std::to_string(price));
  }
  if (bid && ask && !(*bid >= 0.0 && *bid <= *ask)) {
    throw InvalidInput("crossed or negative bid/ask at strike " +
                       std::to_string(strike));
  }
}

SupportGrid::SupportGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < kMinPoints) {
    throw InvalidInput("support grid needs at least 4 points");
  }
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (!std::isfinite(points_[j])) throw InvalidInput("support grid point is not finite");
    if (j > 0 && !(points_[j] > points_[j - 1])) {
      throw InvalidInput("support grid must be strictly increasing");
    }
  }
  const double m1 = static_cast<double>(points_.size() - 1);
  spacing_ = (points_.back() - points_.front()) / m1;
  const double tol = 1e-9 * std::max(spacing_, std::abs(points_.back()));
  for (std::size_t j = 1; j < points_.size(); ++j) {
    if (std::abs((points_[j] - points_[j - 1]) - spacing_) > tol) {
      throw InvalidInput("support grid must be equally spaced");
    }
  }
}

SupportGrid SupportGrid::uniform(double lo, double hi, std::size_t m) {
  if (!(hi > lo) || m < kMinPoints) {
    throw InvalidInput("uniform grid needs hi > lo and m >= 4");
  }
  std::vector<double> pts(m);
  const double h = (hi - lo) / static_cast<double>(m - 1);
  for (std::size_t j = 0; j < m; ++j) pts[j] = lo + h * static_cast<double>(j);
  pts.back() = hi;
  return SupportGrid(std::move(pts));
}

SupportGrid SupportGrid::covering(std::span<const OptionQuote> quotes, std::size_t m,
                                  double pad_fraction) {
  if (quotes.empty()) throw InvalidInput("cannot build a grid for an empty chain");
  if (m < kMinPoints) throw InvalidInput("grid size must be at least 4");
  const auto [lo_it, hi_it] = std::minmax_element(
      quotes.begin(), quotes.end(),
      [](const OptionQuote& a, const OptionQuote& b) { return a.strike < b.strike; });
  const double k_min = lo_it->strike;
  const double k_max = hi_it->strike;
  // A single distinct strike still needs a non-degenerate range.
  const double range = k_max > k_min ? k_max - k_min : 0.5 * k_max;
  const double hi = k_max + pad_fraction * range;
  double lo = k_min - pad_fraction * range;
  // Keep the lower end one spacing above zero.
  const double h = (hi - lo) / static_cast<double>(m - 1);
  if (lo < h) {
    // Solve lo = (hi - lo) / (m - 1) for lo.
    lo = hi / static_cast<double>(m);
  }
  return uniform(lo, hi, m);
}

AicGrid AicGrid::linspace(double lo, double hi, int count) {
  if (count < 1 || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidInput("AIC grid needs a positive count and finite bounds");
  }
  AicGrid grid;
  grid.log10_lambdas.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid.log10_lambdas[static_cast<std::size_t>(i)] =
        count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return grid;
}

void FitConfig::validate() const {
  if (penalty_order < 1) throw InvalidInput("penalty order must be >= 1");
  if (irls_max_iter < 1) throw InvalidInput("irls_max_iter must be >= 1");
  if (!(irls_rel_tol > 0.0)) throw InvalidInput("irls_rel_tol must be > 0");
  if (step_halving_max < 0) throw InvalidInput("step_halving_max must be >= 0");
  if (const auto* fixed = std::get_if<FixedLambda>(&lambda_policy)) {
    if (!(fixed->value > 0.0) || !std::isfinite(fixed->value)) {
      throw InvalidInput("fixed lambda must be positive and finite");
    }
  } else if (const auto* em = std::get_if<SchallEm>(&lambda_policy)) {
    if (!(em->tol > 0.0) || em->max_iter < 1 || !(em->initial > 0.0)) {
      throw InvalidInput("Schall policy needs tol > 0, max_iter >= 1, initial > 0");
    }
  } else {
    const auto& grid = std::get<AicGrid>(lambda_policy);
    if (grid.log10_lambdas.empty()) throw InvalidInput("AIC grid is empty");
    for (double v : grid.log10_lambdas) {
      if (!std::isfinite(v)) throw InvalidInput("AIC grid values must be finite");
    }
  }
}

}  // namespace despd
