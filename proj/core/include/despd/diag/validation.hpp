#pragma once

#include "despd/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace despd::diag {

struct LoocvOptions {
  /// Re-run the lambda selector inside every fold instead of reusing the
  /// full-sample lambda.
  bool reselect_lambda = false;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct LoocvResult {
  double rmse = 0.0;
  int folds = 0;
  int failed_folds = 0;
  /// Held-out prediction per quote; NaN for failed folds.
  std::vector<double> predictions;
  /// One message per failed fold.
  std::vector<std::string> failures;
};

/// Leave-one-out pricing error. Each fold drops quote i, refits on the same
/// grid and predicts quote i. By default folds use the lambda of a full-sample
/// fit under `config`. Failed folds are excluded and counted.
LoocvResult loocv_rmse(std::span<const OptionQuote> quotes, const SupportGrid& grid,
                       const FitConfig& config, const LoocvOptions& options = {});

/// Same as above with the full-sample fit already available.
LoocvResult loocv_rmse(const SpdFit& full_fit, const FitConfig& config,
                       const LoocvOptions& options = {});

/// Piecewise-linear CDF of the fitted masses: zero below u_1, the cumulative
/// mass sum_{i<=j} phi_i / sum(phi) at atom u_j, linear in between, one above
/// u_m. The first atom's mass sits at u_1 itself.
class FittedCdf {
 public:
  explicit FittedCdf(const SupportGrid& grid, const Eigen::VectorXd& phi);

  double operator()(double x) const;

  /// Smallest x with cdf(x) >= p, refined so that cdf(x) == p exactly when
  /// such a double exists.
  double quantile(double p) const;

  /// cdf(median()) == 0.5 exactly whenever the median lies strictly inside
  /// a grid bracket.
  double median() const { return quantile(0.5); }

  const SupportGrid& grid() const { return grid_; }

 private:
  SupportGrid grid_;
  std::vector<double> cumulative_;
  std::optional<double> anchor_;
  std::size_t anchor_bracket_ = 0;
  double anchor_slope_ = 0.0;
};

struct PitRecord {
  std::string observation_time;
  double realized_price = 0.0;
  double z = 0.0;
  /// Normal quantile of z; NaN when saturated.
  double x = 0.0;
  bool saturated = false;
};

struct Realization {
  std::string date;
  double price = 0.0;
};

/// z bounds below/above which the normal transform is reported as saturated.
constexpr double kPitSaturation = 1e-8;

/// Probability integral transforms of realized prices under the fitted SPD.
/// Records are saturated when the price is outside [u_1, u_m] or z is outside
/// [1e-8, 1 - 1e-8]. Throws InvalidInput on non-positive prices.
std::vector<PitRecord> pit_series(const SpdFit& fit, std::span<const Realization> realizations);
std::vector<PitRecord> pit_series(const FittedCdf& cdf, std::span<const Realization> realizations);

/// One-sample Kolmogorov-Smirnov distance of `sample` from U(0, 1).
double ks_uniform_distance(std::vector<double> sample);

/// Asymptotic critical value of the KS distance at the 1% level.
double ks_critical_1pct(std::size_t n);

struct QqPoint {
  double theoretical = 0.0;
  double empirical = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Normal QQ data with pointwise envelopes. Theoretical quantiles are
/// Phi^-1((i - 0.5) / n). Envelopes are theoretical +- z_{(1+level)/2} times
/// the standard deviation of the i-th order statistic across `n_sim`
/// simulated standard-normal samples of size n.
std::vector<QqPoint> qq_envelope(std::span<const double> xs, int n_sim = 1000,
                                 double level = 0.95, std::uint64_t seed = 1);

}  // namespace despd::diag
