#pragma once

#include "despd/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace despd {

/// Mixed-model selection of lambda. Alternates an IRLS fit with
///
///   sigma2   = sum_i w_i r_i^2 / (n - ED)
///   sigma2_r = |D eta|^2 / (ED - d)
///   lambda   = sigma2 / sigma2_r
///
/// until the relative change of lambda drops below the policy tolerance.
/// lambda is clamped to [1e-8, 1e12]. Throws DegenerateVariance when
/// ED - d <= 1e-6; when the budget runs out the lowest-objective iterate is returned
/// with converged == false. An update clamped back onto the current lambda counts
/// as converged.
SpdFit select_lambda_schall(std::span<const OptionQuote> quotes,
                            const SupportGrid& grid, const FitConfig& config);

struct AicPoint {
  double log10_lambda = 0.0;
  double lambda = 0.0;
  double aic = 0.0;
  double effective_dimension = 0.0;
  double weighted_rss = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Empty when the fit succeeded.
  std::string error;
};

struct AicSelection {
  SpdFit best;
  std::vector<AicPoint> profile;
};

/// n ln(RSS_w / n) + 2 ED.
double aic(const SpdFit& fit);

/// Fits every lambda of the AicGrid policy, largest first with warm starts,
/// and keeps the AIC minimizer among converged fits (any fit if none
/// converged). The profile follows the policy's order. Throws AggregateFitError when no grid point could be fitted.
AicSelection select_lambda_aic(std::span<const OptionQuote> quotes,
                               const SupportGrid& grid,
                               const FitConfig& config);

/// Dispatches on config.lambda_policy and config.constrain_sum_to_one.
SpdFit fit(std::span<const OptionQuote> quotes, const SupportGrid& grid,
           const FitConfig& config);

}  // namespace despd
