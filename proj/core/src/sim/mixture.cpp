#include "despd/sim/mixture.hpp"

#include "despd/errors.hpp"
#include "despd/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace despd::sim {

void MixtureSpec::validate() const {
  if (components.empty()) throw InvalidInput("mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !(c.median > 0.0) || !(c.log_sd > 0.0)) {
      throw InvalidInput("mixture weights, medians and scales must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("mixture weights must sum to one");
}

double MixtureSpec::mean() const {
  double m = 0.0;
  for (const auto& c : components) {
    m += c.weight * c.median * std::exp(0.5 * c.log_sd * c.log_sd);
  }
  return m;
}

double MixtureSpec::variance() const {
  double second = 0.0;
  for (const auto& c : components) {
    second += c.weight * c.median * c.median * std::exp(2.0 * c.log_sd * c.log_sd);
  }
  const double m = mean();
  return second - m * m;
}

double MixtureSpec::stddev() const { return std::sqrt(variance()); }

MixtureSpec MixtureSpec::reference() {
  return {{{0.1194, 475.59, 0.0550}, {0.8505, 498.17, 0.0206}, {0.0301, 524.91, 0.0146}}};
}

double mixture_pdf(const MixtureSpec& spec, double x) {
  if (!(x > 0.0)) throw InvalidInput("mixture density needs x > 0");
  double f = 0.0;
  for (const auto& c : spec.components) {
    const double z = (std::log(x) - std::log(c.median)) / c.log_sd;
    f += c.weight * std::exp(-0.5 * z * z) /
         (x * c.log_sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return f;
}

double mixture_cdf(const MixtureSpec& spec, double x) {
  if (!(x > 0.0)) throw InvalidInput("mixture CDF needs x > 0");
  double p = 0.0;
  for (const auto& c : spec.components) {
    p += c.weight * normal_cdf((std::log(x) - std::log(c.median)) / c.log_sd);
  }
  return std::min(p, 1.0);
}

double theoretical_put_price(const MixtureSpec& spec, double k) {
  if (!(k > 0.0)) throw InvalidInput("put price needs k > 0");
  double p = 0.0;
  for (const auto& c : spec.components) {
    const double d = (std::log(k) - std::log(c.median)) / c.log_sd;
    const double forward = c.median * std::exp(0.5 * c.log_sd * c.log_sd);
    p += c.weight * (k * normal_cdf(d) - forward * normal_cdf(d - c.log_sd));
  }
  return std::max(p, 0.0);
}

double theoretical_call_price(const MixtureSpec& spec, double k) {
  if (!(k > 0.0)) throw InvalidInput("call price needs k > 0");
  double v = 0.0;
  for (const auto& c : spec.components) {
    const double d = (std::log(c.median) - std::log(k)) / c.log_sd;
    const double forward = c.median * std::exp(0.5 * c.log_sd * c.log_sd);
    v += c.weight * (forward * normal_cdf(d + c.log_sd) - k * normal_cdf(d));
  }
  return std::max(v, 0.0);
}

std::vector<double> reference_strikes() {
  std::vector<double> k;
  for (int s = 430; s <= 540; s += 5) k.push_back(s);
  return k;
}

std::string_view to_string(NoiseScale scale) {
  switch (scale) {
    case NoiseScale::None: return "none";
    case NoiseScale::Half: return "half";
    case NoiseScale::Full: return "full";
  }
  return "?";
}

double SpreadModel::spread(double price) const { return std::max(floor, proportion * price); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<OptionQuote> generate_replicate(const MixtureSpec& spec,
                                            std::span<const double> strikes,
                                            const NoiseSpec& noise,
                                            const SpreadModel& spread) {
  spec.validate();
  const double factor = noise.scale == NoiseScale::Full   ? 1.0
                        : noise.scale == NoiseScale::Half ? 0.5
                                                          : 0.0;
  UniformStream stream(noise.seed);
  std::vector<OptionQuote> quotes;
  quotes.reserve(strikes.size());
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    const double k = strikes[i];
    if (!(k > 0.0) || (i > 0 && !(k > strikes[i - 1]))) {
      throw InvalidInput("strikes must be positive and increasing");
    }
    const double p = theoretical_put_price(spec, k);
    const double s = spread.spread(p);
    const double eps = (stream.next() - 0.5) * s;
    const double price = std::max(p + factor * eps, 0.0);
    quotes.push_back({OptionSide::Put, k, price, std::max(price - 0.5 * s, 0.0),
                      price + 0.5 * s});
  }
  return quotes;
}

IntegrationRule IntegrationRule::simpson(double lo, double hi, int count) {
  if (count < 3 || count % 2 == 0 || !(hi > lo)) {
    throw InvalidInput("Simpson rule needs an odd node count >= 3 and hi > lo");
  }
  IntegrationRule rule;
  const double h = (hi - lo) / (count - 1);
  rule.nodes.resize(static_cast<std::size_t>(count));
  rule.weights.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = lo + h * i;
    const double w = (i == 0 || i == count - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights[static_cast<std::size_t>(i)] = w * h / 3.0;
  }
  rule.nodes.back() = hi;
  return rule;
}

IntegrationRule rise_rule(const MixtureSpec& spec, const SupportGrid& grid) {
  const double pad = 3.0 * spec.stddev();
  const double lo = std::max(grid.front() - pad, 1e-9 * grid.back());
  return IntegrationRule::simpson(lo, grid.back() + pad, 2001);
}

double rmse(const Eigen::VectorXd& theoretical, const Eigen::VectorXd& fitted) {
  if (theoretical.size() != fitted.size() || theoretical.size() == 0) {
    throw InvalidInput("rmse: vectors must be non-empty and of equal length");
  }
  return std::sqrt((theoretical - fitted).squaredNorm() / static_cast<double>(theoretical.size()));
}

double rise(const MixtureSpec& spec, const std::function<double(double)>& estimate,
            const IntegrationRule& rule) {
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    const double f = mixture_pdf(spec, x);
    const double diff = f - estimate(x);
    err += rule.weights[i] * diff * diff;
    norm += rule.weights[i] * f * f;
  }
  return std::sqrt(err) / std::sqrt(norm);
}

double fitted_density(const SpdFit& fit, double x) {
  const SupportGrid& g = fit.grid;
  if (x < g.front() || x > g.back()) return 0.0;
  const double pos = (x - g.front()) / g.spacing();
  const auto j = std::min(static_cast<std::size_t>(pos), g.size() - 2);
  const double t = pos - static_cast<double>(j);
  const auto ji = static_cast<Eigen::Index>(j);
  return ((1.0 - t) * fit.phi(ji) + t * fit.phi(ji + 1)) / g.spacing();
}

double rise(const MixtureSpec& spec, const SpdFit& fit, const IntegrationRule& rule) {
  return rise(spec, [&fit](double x) { return fitted_density(fit, x); }, rule);
}

}  // namespace despd::sim
