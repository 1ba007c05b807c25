#pragma once

#include "despd/types.hpp"

namespace despd::detail {

/// Fills effective_dimension, sigma2, sigma2_random and covariance_eta from
/// the fit's converged linearization.
void populate_statistics(SpdFit& fit);

}  // namespace despd::detail
