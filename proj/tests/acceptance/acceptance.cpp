// Acceptance runner. Prints one PASS/FAIL line per criterion and exits 1 if
// any criterion fails.

#include "despd/cli/commands.hpp"
#include "despd/cli/chain.hpp"
#include "despd/design.hpp"
#include "despd/diag/arbitrage.hpp"
#include "despd/diag/validation.hpp"
#include "despd/irls.hpp"
#include "despd/lambda_selection.hpp"
#include "despd/objective.hpp"
#include "despd/pricing.hpp"
#include "despd/sim/mixture.hpp"
#include "despd/sim/study.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace despd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

FitConfig fixed(double lambda) {
  FitConfig c;
  c.lambda_policy = FixedLambda{lambda};
  return c;
}

DesignMatrices design_of(const oracle::Instance& in) {
  return {in.g, oracle::difference(static_cast<int>(in.grid.size()), in.d), in.w};
}

void gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(3, 10), md(5, 15);
  std::uniform_real_distribution<double> ld(-2.0, 2.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = nd(rng), m = md(rng);
    const int d = std::min(3, m - 2);
    const auto in = oracle::random_instance(rng, n, m, d, 0.3, true, rep % 2 == 1);
    Eigen::VectorXd eta(m);
    std::normal_distribution<double> z(0.0, 0.5);
    for (int j = 0; j < m; ++j) eta(j) = std::log(1.0 / m) + z(rng);
    const double lambda = std::pow(10.0, ld(rng));
    const auto f = [&](const Eigen::VectorXd& x) { return oracle::objective(in, x, lambda); };
    const auto dm = design_of(in);
    const Eigen::VectorXd g = gradient(eta, in.c, dm, lambda);
    const Eigen::VectorXd gf = oracle::fd_gradient(f, eta);
    const Eigen::MatrixXd h = hessian(eta, in.c, dm, lambda);
    const Eigen::MatrixXd hf = oracle::fd_hessian(f, eta);
    const double gfloor = 1e-6 * gf.lpNorm<Eigen::Infinity>();
    const double hfloor = 1e-6 * hf.lpNorm<Eigen::Infinity>();
    for (int a = 0; a < m; ++a) {
      worst = std::max(worst, std::abs(g(a) - gf(a)) / std::max(std::abs(gf(a)), gfloor));
      for (int b = 0; b < m; ++b) {
        worst = std::max(worst, std::abs(h(a, b) - hf(a, b)) / std::max(std::abs(hf(a, b)), hfloor));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "gradient and Hessian vs finite differences", worst <= 1e-5 && secs < 10.0,
         "max rel err " + fmt("%.2e", worst) + " (tol 1e-5) over 50 instances, " +
             fmt("%.1f s (limit 10 s)", secs));
}

void uniqueness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> nd(6, 15), md(15, 40);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto in = oracle::random_instance(rng, nd(rng), md(rng), 3, 0.5);
    auto a = fixed(1.0);
    a.irls_rel_tol = 1e-13;
    a.irls_max_iter = 400;
    auto b = a;
    b.eta_init = EtaInit::LogGaussianMoment;
    const SpdFit fa = fit_constrained(in.quotes, in.grid, a);
    const SpdFit fb = fit_constrained(in.quotes, in.grid, b);
    worst = std::max(worst, (fa.eta - fb.eta).lpNorm<Eigen::Infinity>());
  }
  const double secs = seconds_since(t0);
  report(2, "unique optimum from two starts", worst <= 1e-4 && secs < 30.0,
         "max |eta_a - eta_b| " + fmt("%.2e", worst) + " (tol 1e-4) over 20 instances, " +
             fmt("%.1f s (limit 30 s)", secs));
}

void no_arbitrage() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SpdFit> corpus;
  for (const char* name : {"chain_zero_noise.csv", "chain_full_noise.csv", "chain_mixed_discounted.csv"}) {
    const auto chain = cli::ingest(std::string(DESPD_FIXTURE_DIR) + "/" + name);
    corpus.push_back(fit(chain.quotes, SupportGrid::covering(chain.quotes), FitConfig{}));
  }
  const auto spec = sim::MixtureSpec::reference();
  for (auto noise : {sim::NoiseScale::None, sim::NoiseScale::Half, sim::NoiseScale::Full}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto q = sim::generate_replicate(spec, sim::reference_strikes(),
                                             {noise, sim::derive_seed(303, s)});
      corpus.push_back(fit(q, SupportGrid::covering(q), FitConfig{}));
    }
  }
  std::mt19937_64 rng(304);
  for (int rep = 0; rep < 10; ++rep) {
    const auto in = oracle::random_instance(rng, 12, 30, 3, 0.5);
    corpus.push_back(fit(in.quotes, in.grid, fixed(std::pow(10.0, rep - 3))));
  }

  int failing = 0;
  double worst_violation = 0.0, worst_parity = 0.0;
  for (const auto& f : corpus) {
    const auto r = diag::arbitrage_audit(f);
    failing += !r.all_pass();
    worst_violation = std::max({worst_violation, r.density_violation, r.negative_price_violation,
                                r.monotone_violation, r.convexity_violation});
    std::vector<double> probes(100);
    for (int i = 0; i < 100; ++i) {
      probes[static_cast<std::size_t>(i)] =
          f.grid.front() + (f.grid.back() - f.grid.front()) * (i + 0.5) / 100.0;
    }
    worst_parity = std::max(worst_parity, diag::arbitrage_audit(f, probes).parity_gap);
  }
  const double secs = seconds_since(t0);
  const bool pass = failing == 0 && worst_violation <= 1e-10 && worst_parity <= 1e-8 && secs < 30.0;
  report(3, "no-arbitrage audit of constrained fits", pass,
         std::to_string(corpus.size()) + " fits, " + std::to_string(failing) + " failing, max violation " +
             fmt("%.2e", worst_violation) + " (tol 1e-10), max parity gap " + fmt("%.2e", worst_parity) +
             " (tol 1e-8) at 100 probes, " + fmt("%.1f s (limit 30 s)", secs));
}

void simulation() {
  const auto t0 = std::chrono::steady_clock::now();
  sim::StudyConfig cfg;
  cfg.replicates = 100;
  cfg.regimes = {sim::NoiseScale::Full, sim::NoiseScale::Half, sim::NoiseScale::None};
  cfg.master_seed = 1;
  const auto study = sim::run_study(cfg);
  const double secs = seconds_since(t0);
  const auto& full = study.regimes[0];
  const auto& half = study.regimes[1];
  const auto& none = study.regimes[2];

  report(4, "convergence budgets (full noise, m=200)",
         full.irls_within_30 >= 0.95 && full.em_within_15 >= 0.90 && secs < 300.0,
         "IRLS <= 30 iterations on " + fmt("%.0f%%", 100 * full.irls_within_30) +
             " (need 95%), Schall EM <= 15 on " + fmt("%.0f%%", 100 * full.em_within_15) +
             " (need 90%), study " + fmt("%.1f s (limit 300 s)", secs));

  double max_price = 0.0;
  for (double k : cfg.strikes) max_price = std::max(max_price, sim::theoretical_put_price(cfg.mixture, k));
  const bool a = full.rmse.median < full.mean_noise_half_width;
  const bool b = half.rise.median <= full.rise.median;
  const bool c = none.rmse.median <= 1e-3 * max_price && none.rise.median <= 0.05;
  report(5, "simulation recovery", a && b && c,
         "(a) median RMSE full " + fmt("%.4f", full.rmse.median) + " < half-width " +
             fmt("%.4f", full.mean_noise_half_width) + (a ? " ok" : " NO") + "; (b) median RISE half " +
             fmt("%.4f", half.rise.median) + " <= full " + fmt("%.4f", full.rise.median) +
             (b ? " ok" : " NO") + "; (c) zero-noise RMSE " + fmt("%.2e", none.rmse.median) +
             " <= " + fmt("%.2e", 1e-3 * max_price) + ", RISE " + fmt("%.4f", none.rise.median) +
             " <= 0.05" + (c ? " ok" : " NO"));
}

void effective_dimension() {
  std::mt19937_64 rng(606);
  const auto in = oracle::random_instance(rng, 20, 40, 3, 0.3);
  std::vector<double> eds;
  std::string trail;
  for (double lambda : {1e-2, 1.0, 1e2, 1e4, 1e8}) {
    const auto f = fit(in.quotes, in.grid, fixed(lambda));
    eds.push_back(f.effective_dimension);
    trail += fmt("%.3f ", f.effective_dimension);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < eds.size(); ++i) monotone = monotone && eds[i] <= eds[i - 1] + 1e-9;
  const double limit = fit(in.quotes, in.grid, fixed(1e12)).effective_dimension;
  report(6, "effective dimension bounds and limit", monotone && std::abs(limit - 3.0) <= 0.05,
         "ED over lambda 1e-2..1e8: " + trail + (monotone ? "(non-increasing)" : "(NOT monotone)") +
             ", ED at 1e12 " + fmt("%.4f", limit) + " (target 3 +- 0.05)");
}

void brute_force() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> nd(3, 6), md(5, 6);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int m = md(rng);
    const int d = rep % 2 == 0 ? 2 : 3;
    const auto in = oracle::random_instance(rng, nd(rng), m, d, 0.3);
    const double lambda = std::pow(10.0, rep % 5 - 2);
    FitConfig cfg = fixed(lambda);
    cfg.penalty_order = d;
    cfg.irls_rel_tol = 1e-12;
    cfg.irls_max_iter = 500;
    const SpdFit f = fit_penalized_irls(in.quotes, in.grid, cfg);
    const auto obj = [&](const Eigen::VectorXd& x) { return oracle::objective(in, x, lambda); };
    const Eigen::VectorXd x = oracle::minimize(
        obj, {Eigen::VectorXd::Constant(m, std::log(1.0 / m)), Eigen::VectorXd::Zero(m)});
    worst = std::max(worst, std::abs(f.objective - static_cast<double>(obj(x))));
  }
  const double secs = seconds_since(t0);
  report(7, "IRLS vs generic minimizer", worst <= 1e-4 && secs < 60.0,
         "max |S_irls - S_generic| " + fmt("%.2e", worst) + " (tol 1e-4) over 10 instances, " +
             fmt("%.1f s (limit 60 s)", secs));
}

void pit() {
  const auto spec = sim::MixtureSpec::reference();
  const auto q = sim::generate_replicate(spec, sim::reference_strikes(), {sim::NoiseScale::Full, 808});
  const SpdFit f = fit(q, SupportGrid::covering(q), FitConfig{});

  // Inverse-CDF sampling from the atom masses, independent of FittedCdf.
  std::vector<double> cum(f.grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < f.grid.size(); ++j) cum[j] = acc += f.phi(static_cast<Eigen::Index>(j));
  std::mt19937_64 rng(809);
  std::uniform_real_distribution<double> unif(cum[0] / acc, 1.0);
  std::vector<diag::Realization> draws;
  while (draws.size() < 10000) {
    const double p = unif(rng) * acc;
    const auto j = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), p) - cum.begin());
    if (j == 0) continue;
    const double t = (p - cum[j - 1]) / (cum[j] - cum[j - 1]);
    draws.push_back({"", f.grid[j - 1] + t * f.grid.spacing()});
  }
  std::vector<double> z;
  for (const auto& r : diag::pit_series(f, draws)) z.push_back(r.z);
  const double ks = diag::ks_uniform_distance(z);
  const double crit = diag::ks_critical_1pct(z.size());
  const double median = diag::FittedCdf(f.grid, f.phi).median();
  const std::vector<diag::Realization> at_median = {{"", median}};
  const double x = diag::pit_series(f, at_median)[0].x;
  report(8, "PIT self-consistency", ks <= crit && x == 0.0,
         "KS distance " + fmt("%.4f", ks) + " vs 1% critical " + fmt("%.4f", crit) +
             " on 1e4 draws, x at fitted median " + fmt("%g", x));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b, int& files) {
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  return true;
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "despd_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream sink;
  const auto run = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.begin(), "despd");
    args.push_back("--out-dir");
    args.push_back(out.string());
    return cli::run(args, sink, sink);
  };
  bool pass = true;
  int files = 0;
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    pass = pass && run({"simulate", "--seed", "7", "--replicates", "20"}, root / ("sim" + tag)) == 0;
    for (const char* name : {"chain_zero_noise.csv", "chain_full_noise.csv", "chain_mixed_discounted.csv"}) {
      pass = pass && run({"fit", std::string(DESPD_FIXTURE_DIR) + "/" + name}, root / (name + tag)) == 0;
    }
  }
  if (pass) {
    pass = same_tree(root / "sim0", root / "sim1", files);
    for (const char* name : {"chain_zero_noise.csv", "chain_full_noise.csv", "chain_mixed_discounted.csv"}) {
      pass = pass && same_tree(root / (std::string(name) + "0"), root / (std::string(name) + "1"), files);
    }
  }
  fs::remove_all(root);
  report(9, "deterministic CLI artifacts", pass,
         std::to_string(files) + " artifacts compared byte for byte across two runs of simulate --seed 7 and fit");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> criteria = {gradient_oracle, uniqueness, no_arbitrage,
                                                       simulation,      effective_dimension, brute_force,
                                                       pit,             determinism};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion threw: %s\n", e.what());
      ++g_failures;
    }
  }
  std::printf("%s: %d failing, %.1f s total\n", g_failures == 0 ? "ALL PASS" : "FAILED", g_failures,
              seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
