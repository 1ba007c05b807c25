#pragma once

#include "despd/sim/mixture.hpp"
#include "despd/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace despd::sim {

struct StudyConfig {
  MixtureSpec mixture = MixtureSpec::reference();
  std::vector<double> strikes = reference_strikes();
  int replicates = 1000;
  std::vector<NoiseScale> regimes = {NoiseScale::Full, NoiseScale::Half};
  std::uint64_t master_seed = 1;
  SpreadModel spread;
  FitConfig fit;
  std::size_t grid_size = 200;
  double grid_pad = 0.25;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct ReplicateResult {
  NoiseScale regime = NoiseScale::Full;
  int index = 0;
  bool ok = false;
  std::string error;
  double rmse = 0.0;
  double rise = 0.0;
  double lambda = 0.0;
  double effective_dimension = 0.0;
  bool converged = false;
  int irls_iters = 0;
  int em_iters = 0;
};

struct QuantileSummary {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation (type 7) quantiles. Throws InvalidInput on empty input.
QuantileSummary summarize(std::vector<double> values);

struct RegimeSummary {
  NoiseScale regime = NoiseScale::Full;
  int replicates = 0;
  int failures = 0;
  QuantileSummary rmse;
  QuantileSummary rise;
  QuantileSummary lambda;
  /// Mean of the noise half-width over strikes (0.5 * S for full noise).
  double mean_noise_half_width = 0.0;
  /// Fraction of successful replicates whose IRLS / EM loops stayed within
  /// 30 / 15 iterations.
  double irls_within_30 = 0.0;
  double em_within_15 = 0.0;
};

struct StudyReport {
  StudyConfig config;
  std::vector<ReplicateResult> replicates;
  std::vector<RegimeSummary> regimes;
};

/// Fits one replicate and scores it against the ground truth. Never throws
/// for fit failures; they land in ReplicateResult::error.
ReplicateResult run_replicate(const StudyConfig& config, NoiseScale regime, int index);

/// Runs every regime. Replicate r of regime g draws its noise from
/// derive_seed(master_seed, g * replicates + r), so results do not depend on
/// the thread count. Throws Error when more than 10% of a regime's replicates
/// fail.
StudyReport run_study(const StudyConfig& config);

/// study.json: provenance (mixture, strikes, spread model, fit settings, seed)
/// plus per-regime summaries.
std::string study_json(const StudyReport& report);

/// replicates.csv: one row per replicate.
std::string replicates_csv(const StudyReport& report);

/// Same rows as replicates_csv as a JSON array.
std::string replicates_json(const StudyReport& report);

}  // namespace despd::sim
