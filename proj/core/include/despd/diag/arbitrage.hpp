#pragma once

#include "despd/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace despd::diag {

/// Numerical audit of the four no-arbitrage conditions on predicted prices.
/// Every magnitude is >= 0 and a flag is true when its magnitude is within
/// the audit tolerance.
struct ArbitrageReport {
  bool density_proper = true;
  /// max(0, -min phi) + |sum phi - 1|.
  double density_violation = 0.0;
  bool prices_nonnegative = true;
  double negative_price_violation = 0.0;
  bool call_monotone = true;
  /// Call slopes must lie in [-1, 0]; largest excursion outside.
  double monotone_violation = 0.0;
  /// Most negative and most positive call slope seen.
  double worst_slope_low = 0.0;
  double worst_slope_high = 0.0;
  bool call_convex = true;
  /// max(0, -min second divided difference).
  double convexity_violation = 0.0;
  double worst_second_difference = 0.0;
  /// max_k |c(k) - p(k) + k - sum_j u_j phi_j|.
  double parity_gap = 0.0;
  std::size_t probes = 0;

  bool all_pass() const {
    return density_proper && prices_nonnegative && call_monotone && call_convex;
  }
};

constexpr double kAuditTolerance = 1e-10;

/// Grid midpoints plus `extra` strikes, sorted, with points closer than a
/// thousandth of a grid spacing merged.
std::vector<double> default_probe_strikes(const SupportGrid& grid,
                                          std::span<const double> extra = {});

/// Audits the call/put curves implied by `fit` at `probe_strikes` (uses
/// default_probe_strikes(fit.grid, observed strikes) when empty).
ArbitrageReport arbitrage_audit(const SpdFit& fit, std::span<const double> probe_strikes = {},
                                double tolerance = kAuditTolerance);

/// Checks monotonicity and convexity of an arbitrary call-price curve. Used
/// to audit externally supplied prices; density and parity fields are left at
/// their passing defaults.
ArbitrageReport audit_call_curve(std::span<const double> strikes,
                                 std::span<const double> call_prices,
                                 double tolerance = kAuditTolerance);

std::string to_json(const ArbitrageReport& report);

}  // namespace despd::diag
