#pragma once

#include "despd/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace despd::sim {

/// Log-normal component: log(S) ~ N(log(median), log_sd^2).
struct LogNormalComponent {
  double weight = 1.0;
  double median = 1.0;
  double log_sd = 0.1;
};

struct MixtureSpec {
  std::vector<LogNormalComponent> components;

  /// Throws InvalidInput unless every weight and scale is positive and the
  /// weights sum to one within 1e-12.
  void validate() const;

  double mean() const;
  double variance() const;
  double stddev() const;

  /// The three-component mixture used by the reference simulation study.
  static MixtureSpec reference();
};

double mixture_pdf(const MixtureSpec& spec, double x);
double mixture_cdf(const MixtureSpec& spec, double x);

/// E[(k - S)^+] and E[(S - k)^+] under the mixture, in closed form per
/// component.
double theoretical_put_price(const MixtureSpec& spec, double k);
double theoretical_call_price(const MixtureSpec& spec, double k);

/// 430, 435, ..., 540.
std::vector<double> reference_strikes();

enum class NoiseScale { None, Half, Full };

std::string_view to_string(NoiseScale scale);

struct NoiseSpec {
  NoiseScale scale = NoiseScale::Full;
  std::uint64_t seed = 0;
};

/// Bid-ask spread as a function of the theoretical price:
/// max(floor, proportion * price).
struct SpreadModel {
  double floor = 0.05;
  double proportion = 0.05;

  double spread(double price) const;
};

/// Uniform doubles in [0, 1) from a seeded 64-bit Mersenne twister. The
/// conversion is done here rather than by a standard distribution so that the
/// stream is identical across standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a master seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Put quotes at `strikes` priced under `spec` plus eps ~ U(-S/2, S/2), scaled
/// by one half for NoiseScale::Half and zero for NoiseScale::None. Prices are
/// floored at zero; bid/ask straddle the noisy price by S/2.
std::vector<OptionQuote> generate_replicate(const MixtureSpec& spec,
                                            std::span<const double> strikes,
                                            const NoiseSpec& noise,
                                            const SpreadModel& spread = {});

/// Fixed quadrature rule.
struct IntegrationRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Composite Simpson rule with `count` (odd) nodes on [lo, hi].
  static IntegrationRule simpson(double lo, double hi, int count);
};

/// Simpson rule on the grid extended by three mixture standard deviations,
/// 2001 nodes.
IntegrationRule rise_rule(const MixtureSpec& spec, const SupportGrid& grid);

double rmse(const Eigen::VectorXd& theoretical, const Eigen::VectorXd& fitted);

/// |f*|^-1 sqrt(int (f* - f_hat)^2 dx) on `rule`.
double rise(const MixtureSpec& spec, const std::function<double(double)>& estimate,
            const IntegrationRule& rule);

/// RISE of a fitted SPD: densities phi_j / spacing, linearly interpolated
/// between atoms and zero outside the grid.
double rise(const MixtureSpec& spec, const SpdFit& fit, const IntegrationRule& rule);

/// Piecewise-linear density of a fit at x.
double fitted_density(const SpdFit& fit, double x);

}  // namespace despd::sim
