#include "despd/sim/study.hpp"

#include "despd/errors.hpp"
#include "despd/format.hpp"
#include "despd/lambda_selection.hpp"
#include "../parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace despd::sim {
namespace {

using nlohmann::ordered_json;

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return v[lo] + t * (v[hi] - v[lo]);
}

ordered_json to_json(const QuantileSummary& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

std::string lambda_policy_name(const LambdaPolicy& policy) {
  if (const auto* f = std::get_if<FixedLambda>(&policy)) return "fixed:" + format_double(f->value);
  if (std::holds_alternative<SchallEm>(policy)) return "schall";
  return "aic";
}

ordered_json replicate_row(const ReplicateResult& r) {
  return {{"regime", std::string(to_string(r.regime))},
          {"replicate", r.index},
          {"ok", r.ok},
          {"rmse", r.rmse},
          {"rise", r.rise},
          {"lambda", r.lambda},
          {"effective_dimension", r.effective_dimension},
          {"converged", r.converged},
          {"irls_iters", r.irls_iters},
          {"em_iters", r.em_iters},
          {"error", r.error}};
}

}  // namespace

QuantileSummary summarize(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("cannot summarize an empty sample");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
          quantile_sorted(values, 0.75), values.back()};
}

ReplicateResult run_replicate(const StudyConfig& config, NoiseScale regime, int index) {
  ReplicateResult out;
  out.regime = regime;
  out.index = index;

  std::size_t regime_pos = 0;
  for (std::size_t g = 0; g < config.regimes.size(); ++g) {
    if (config.regimes[g] == regime) regime_pos = g;
  }
  const std::uint64_t stream =
      regime_pos * static_cast<std::uint64_t>(config.replicates) + static_cast<std::uint64_t>(index);
  const NoiseSpec noise{regime, derive_seed(config.master_seed, stream)};
  const auto quotes = generate_replicate(config.mixture, config.strikes, noise, config.spread);

  try {
    const SupportGrid grid = SupportGrid::covering(quotes, config.grid_size, config.grid_pad);
    const SpdFit fit = despd::fit(quotes, grid, config.fit);
    Eigen::VectorXd truth(static_cast<Eigen::Index>(config.strikes.size()));
    for (std::size_t i = 0; i < config.strikes.size(); ++i) {
      truth(static_cast<Eigen::Index>(i)) = theoretical_put_price(config.mixture, config.strikes[i]);
    }
    out.rmse = rmse(truth, fit.fitted_prices);
    out.rise = rise(config.mixture, fit, rise_rule(config.mixture, grid));
    out.lambda = fit.lambda;
    out.effective_dimension = fit.effective_dimension;
    out.converged = fit.converged;
    out.irls_iters = fit.max_inner_iterations;
    out.em_iters = fit.selection_iterations;
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

StudyReport run_study(const StudyConfig& config) {
  if (config.replicates < 1) throw InvalidInput("study needs at least one replicate");
  if (config.regimes.empty()) throw InvalidInput("study needs at least one noise regime");
  config.mixture.validate();
  config.fit.validate();

  StudyReport report;
  report.config = config;
  const auto per_regime = static_cast<std::size_t>(config.replicates);
  const std::size_t total = per_regime * config.regimes.size();
  report.replicates.resize(total);
  detail::parallel_for(total, config.threads, [&](std::size_t i) {
    report.replicates[i] = run_replicate(config, config.regimes[i / per_regime],
                                         static_cast<int>(i % per_regime));
  });

  for (std::size_t g = 0; g < config.regimes.size(); ++g) {
    RegimeSummary s;
    s.regime = config.regimes[g];
    s.replicates = config.replicates;
    std::vector<double> rmses, rises, lambdas;
    int irls_ok = 0, em_ok = 0;
    for (std::size_t r = 0; r < per_regime; ++r) {
      const auto& rep = report.replicates[g * per_regime + r];
      if (!rep.ok) {
        ++s.failures;
        continue;
      }
      rmses.push_back(rep.rmse);
      rises.push_back(rep.rise);
      lambdas.push_back(rep.lambda);
      if (rep.irls_iters <= 30) ++irls_ok;
      if (rep.em_iters <= 15) ++em_ok;
    }
    if (s.failures * 10 > s.replicates) {
      std::ostringstream msg;
      msg << "study regime " << to_string(s.regime) << ": " << s.failures << " of "
          << s.replicates << " replicates failed";
      throw Error(msg.str());
    }
    s.rmse = summarize(rmses);
    s.rise = summarize(rises);
    s.lambda = summarize(lambdas);
    const double factor = s.regime == NoiseScale::Full ? 1.0 : s.regime == NoiseScale::Half ? 0.5 : 0.0;
    double spread_sum = 0.0;
    for (double k : config.strikes) {
      spread_sum += config.spread.spread(theoretical_put_price(config.mixture, k));
    }
    s.mean_noise_half_width = factor * 0.5 * spread_sum / static_cast<double>(config.strikes.size());
    const auto good = static_cast<double>(rmses.size());
    s.irls_within_30 = irls_ok / good;
    s.em_within_15 = em_ok / good;
    report.regimes.push_back(s);
  }
  return report;
}

std::string study_json(const StudyReport& report) {
  const StudyConfig& c = report.config;
  ordered_json mixture = ordered_json::array();
  for (const auto& comp : c.mixture.components) {
    mixture.push_back({{"weight", comp.weight}, {"median", comp.median}, {"log_sd", comp.log_sd}});
  }
  ordered_json regimes = ordered_json::array();
  for (const auto& s : report.regimes) {
    regimes.push_back({{"regime", std::string(to_string(s.regime))},
                       {"replicates", s.replicates},
                       {"failures", s.failures},
                       {"mean_noise_half_width", s.mean_noise_half_width},
                       {"irls_within_30", s.irls_within_30},
                       {"em_within_15", s.em_within_15},
                       {"rmse", to_json(s.rmse)},
                       {"rise", to_json(s.rise)},
                       {"lambda", to_json(s.lambda)}});
  }
  ordered_json doc = {
      {"provenance",
       {{"mixture", mixture},
        {"mixture_parameterization", "log(S) ~ N(log(median), log_sd^2)"},
        {"strikes", c.strikes},
        {"spread_model", {{"floor", c.spread.floor}, {"proportion", c.spread.proportion}}},
        {"master_seed", c.master_seed},
        {"replicates", c.replicates},
        {"grid_size", c.grid_size},
        {"grid_pad", c.grid_pad},
        {"penalty_order", c.fit.penalty_order},
        {"lambda_policy", lambda_policy_name(c.fit.lambda_policy)},
        {"constrained", c.fit.constrain_sum_to_one},
        {"irls_rel_tol", c.fit.irls_rel_tol}}},
      {"regimes", regimes}};
  return doc.dump(2) + "\n";
}

std::string replicates_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "regime,replicate,ok,rmse,rise,lambda,effective_dimension,converged,irls_iters,em_iters\n";
  for (const auto& r : report.replicates) {
    out << to_string(r.regime) << ',' << r.index << ',' << (r.ok ? 1 : 0) << ','
        << format_double(r.rmse) << ',' << format_double(r.rise) << ','
        << format_double(r.lambda) << ',' << format_double(r.effective_dimension) << ','
        << (r.converged ? 1 : 0) << ',' << r.irls_iters << ',' << r.em_iters << '\n';
  }
  return out.str();
}

std::string replicates_json(const StudyReport& report) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.replicates) rows.push_back(replicate_row(r));
  return rows.dump(2) + "\n";
}

}  // namespace despd::sim
