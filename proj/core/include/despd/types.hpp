#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace despd {

enum class OptionSide { Call, Put };

std::string_view to_string(OptionSide side);

/// One observed European contract. Prices are already discount-scaled, i.e.
/// expressed as if exp(-r tau) == 1.
struct OptionQuote {
  OptionSide side = OptionSide::Call;
  double strike = 0.0;
  double price = 0.0;
  std::optional<double> bid;
  std::optional<double> ask;

  /// Throws InvalidInput when strike <= 0, price < 0 or the bid/ask pair is
  /// crossed or negative.
  void validate() const;
};

/// Strictly increasing, equally spaced set of candidate terminal prices.
class SupportGrid {
 public:
  /// Minimum number of atoms accepted by the constructor.
  static constexpr std::size_t kMinPoints = 4;

  explicit SupportGrid(std::vector<double> points);

  /// m equally spaced atoms covering [lo, hi].
  static SupportGrid uniform(double lo, double hi, std::size_t m);

  /// Default grid for a chain: strikes padded by `pad_fraction` of their range
  /// on both sides, lower end kept at least one spacing above zero.
  static SupportGrid covering(std::span<const OptionQuote> quotes,
                              std::size_t m = 200, double pad_fraction = 0.25);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double spacing() const { return spacing_; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double operator[](std::size_t j) const { return points_[j]; }

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {points_.data(), static_cast<Eigen::Index>(points_.size())};
  }

 private:
  std::vector<double> points_;
  double spacing_ = 0.0;
};

struct FixedLambda {
  double value = 1.0;
};

/// Mixed-model (Schall) variance-component iteration.
/// The first inner fit starts cold from eta_init, which is slow when lambda
/// is tiny, so the default start sits on the heavily smoothed side.
struct SchallEm {
  double initial = 1e3;
  int max_iter = 50;
  double tol = 1e-3;
};

/// Exhaustive search over log10(lambda).
struct AicGrid {
  std::vector<double> log10_lambdas;

  /// `count` evenly spaced values in [lo, hi].
  static AicGrid linspace(double lo, double hi, int count);
};

using LambdaPolicy = std::variant<FixedLambda, SchallEm, AicGrid>;

enum class Weighting { Homoscedastic, PriceStrikeRatio };
enum class EtaInit { FlatUniform, LogGaussianMoment };

struct FitConfig {
  int penalty_order = 3;
  LambdaPolicy lambda_policy = SchallEm{};
  bool constrain_sum_to_one = true;
  Weighting weighting = Weighting::Homoscedastic;
  int irls_max_iter = 50;
  double irls_rel_tol = 1e-5;
  int step_halving_max = 20;
  EtaInit eta_init = EtaInit::FlatUniform;

  void validate() const;
};

/// Payoff matrix G, difference matrix D and observation weights W.
struct DesignMatrices {
  Eigen::MatrixXd payoff;
  Eigen::MatrixXd difference;
  Eigen::VectorXd weights;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  /// Fraction of the Gauss-Newton step that was accepted (1, 1/2, 1/4, ...).
  double step_scale = 1.0;
  int halvings = 0;
};

/// Result of a penalized fit on a fixed support grid.
struct SpdFit {
  explicit SpdFit(SupportGrid support) : grid(std::move(support)) {}

  SupportGrid grid;
  int penalty_order = 3;
  bool constrained = false;

  /// The chain that was fitted, its payoff matrix and observed prices.
  std::vector<OptionQuote> quotes;
  Eigen::MatrixXd payoff;
  Eigen::VectorXd observed;

  Eigen::VectorXd eta;
  /// Probability masses on grid atoms, exp(eta).
  Eigen::VectorXd phi;
  Eigen::VectorXd fitted_prices;
  /// Observation weights at the converged linearization.
  Eigen::VectorXd weights;

  double lambda = 0.0;
  double objective = 0.0;
  double effective_dimension = 0.0;
  /// NaN when n - ED <= 0.
  double sigma2 = 0.0;
  /// NaN when ED - d <= 0.
  double sigma2_random = 0.0;
  Eigen::MatrixXd covariance_eta;
  std::optional<double> lagrange_omega;

  std::vector<IterationRecord> trace;
  int iterations = 0;
  bool converged = false;

  /// Outer iterations of the lambda selector (0 for a fixed lambda).
  int selection_iterations = 0;
  /// Largest IRLS iteration count over every inner fit.
  int max_inner_iterations = 0;

  /// Strikes that fell outside [u_1, u_m].
  std::vector<std::string> warnings;

  /// Densities phi_j / spacing for plotting and integrated errors.
  Eigen::VectorXd density() const { return phi / grid.spacing(); }
};

}  // namespace despd
