#include "despd/diag/arbitrage.hpp"

#include "despd/errors.hpp"
#include "despd/pricing.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace despd::diag {
namespace {

void audit_curve(std::span<const double> k, std::span<const double> c, double tolerance,
                 ArbitrageReport& report) {
  report.probes = k.size();
  double slope_low = 0.0, slope_high = -1.0;
  double min_dd = 0.0;
  double neg = 0.0;
  for (double v : c) neg = std::max(neg, -v);
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double s = (c[i + 1] - c[i]) / (k[i + 1] - k[i]);
    slope_low = std::min(slope_low, s);
    slope_high = std::max(slope_high, s);
    if (i + 2 < k.size()) {
      const double s2 = (c[i + 2] - c[i + 1]) / (k[i + 2] - k[i + 1]);
      const double dd = 2.0 * (s2 - s) / (k[i + 2] - k[i]);
      min_dd = std::min(min_dd, dd);
    }
  }
  if (k.size() < 2) slope_high = 0.0;
  report.worst_slope_low = slope_low;
  report.worst_slope_high = slope_high;
  report.monotone_violation = std::max({0.0, slope_high, -1.0 - slope_low});
  report.call_monotone = report.monotone_violation <= tolerance;
  report.worst_second_difference = min_dd;
  report.convexity_violation = std::max(0.0, -min_dd);
  report.call_convex = report.convexity_violation <= tolerance;
  report.negative_price_violation = neg;
  report.prices_nonnegative = neg <= tolerance;
}

}  // namespace

std::vector<double> default_probe_strikes(const SupportGrid& grid, std::span<const double> extra) {
  std::vector<double> pts;
  pts.reserve(grid.size() + extra.size());
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) pts.push_back(0.5 * (grid[j] + grid[j + 1]));
  for (double k : extra) {
    if (k > 0.0 && std::isfinite(k)) pts.push_back(k);
  }
  std::sort(pts.begin(), pts.end());
  const double merge = 1e-3 * grid.spacing();
  std::vector<double> out;
  for (double k : pts) {
    if (out.empty() || k - out.back() > merge) out.push_back(k);
  }
  return out;
}

ArbitrageReport audit_call_curve(std::span<const double> strikes,
                                 std::span<const double> call_prices, double tolerance) {
  if (strikes.size() != call_prices.size()) {
    throw InvalidInput("audit: strikes and prices differ in length");
  }
  for (std::size_t i = 1; i < strikes.size(); ++i) {
    if (!(strikes[i] > strikes[i - 1])) throw InvalidInput("audit: strikes must increase");
  }
  ArbitrageReport report;
  audit_curve(strikes, call_prices, tolerance, report);
  return report;
}

ArbitrageReport arbitrage_audit(const SpdFit& fit, std::span<const double> probe_strikes,
                                double tolerance) {
  std::vector<double> probes;
  if (probe_strikes.empty()) {
    std::vector<double> observed;
    for (const auto& q : fit.quotes) observed.push_back(q.strike);
    probes = default_probe_strikes(fit.grid, observed);
  } else {
    probes.assign(probe_strikes.begin(), probe_strikes.end());
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  }

  std::vector<double> calls(probes.size()), puts(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    calls[i] = expected_payoff(fit.grid, fit.phi, OptionSide::Call, probes[i]);
    puts[i] = expected_payoff(fit.grid, fit.phi, OptionSide::Put, probes[i]);
  }

  ArbitrageReport report;
  audit_curve(probes, calls, tolerance, report);
  double put_neg = 0.0;
  for (double p : puts) put_neg = std::max(put_neg, -p);
  report.negative_price_violation = std::max(report.negative_price_violation, put_neg);
  report.prices_nonnegative = report.negative_price_violation <= tolerance;

  const double min_phi = fit.phi.minCoeff();
  report.density_violation = std::max(0.0, -min_phi) + std::abs(fit.phi.sum() - 1.0);
  report.density_proper = min_phi > 0.0 && report.density_violation <= tolerance;

  const double forward = implied_forward(fit);
  double gap = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    gap = std::max(gap, std::abs(calls[i] - puts[i] + probes[i] - forward));
  }
  report.parity_gap = gap;
  return report;
}

std::string to_json(const ArbitrageReport& r) {
  nlohmann::ordered_json doc = {
      {"all_pass", r.all_pass()},
      {"density_proper", r.density_proper},
      {"density_violation", r.density_violation},
      {"prices_nonnegative", r.prices_nonnegative},
      {"negative_price_violation", r.negative_price_violation},
      {"call_monotone", r.call_monotone},
      {"monotone_violation", r.monotone_violation},
      {"worst_slope_low", r.worst_slope_low},
      {"worst_slope_high", r.worst_slope_high},
      {"call_convex", r.call_convex},
      {"convexity_violation", r.convexity_violation},
      {"worst_second_difference", r.worst_second_difference},
      {"parity_gap", r.parity_gap},
      {"probes", r.probes}};
  return doc.dump(2);
}

}  // namespace despd::diag
