#pragma once

namespace despd {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative
/// accuracy). Returns -inf / +inf at 0 / 1 and NaN outside [0, 1].
double normal_quantile(double p);

}  // namespace despd
