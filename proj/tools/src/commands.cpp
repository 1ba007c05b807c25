#include "despd/cli/commands.hpp"

#include "despd/cli/chain.hpp"
#include "despd/diag/arbitrage.hpp"
#include "despd/diag/validation.hpp"
#include "despd/errors.hpp"
#include "despd/format.hpp"
#include "despd/lambda_selection.hpp"
#include "despd/sim/study.hpp"
#include "despd/uncertainty.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

namespace despd::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

using Artifacts = std::vector<std::pair<std::string, std::string>>;

/// Files are only touched once every artifact of a command exists in memory.
void write_artifacts(const fs::path& dir, const Artifacts& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << content;
    if (!f) throw Error("failed writing " + (dir / name).string());
  }
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

/// NaN and infinities are not JSON numbers; they become null.
ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DegenerateVariance*>(&e)) return "DegenerateVariance";
  if (dynamic_cast<const SingularSystem*>(&e)) return "SingularSystem";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const AggregateFitError*>(&e)) return "AggregateFitError";
  if (dynamic_cast<const InvalidInput*>(&e)) return "InvalidInput";
  return "Error";
}

int solver_failure(const std::string& command, const RunConfig& cfg, const Error& e,
                   std::ostream& err) {
  ordered_json doc = {{"command", command}, {"error", error_kind(e)}, {"message", e.what()}};
  if (const auto* dv = dynamic_cast<const DegenerateVariance*>(&e)) {
    ordered_json trace = ordered_json::array();
    for (double l : dv->lambda_trace()) trace.push_back(number(l));
    doc["lambda_trace"] = trace;
  }
  if (const auto* agg = dynamic_cast<const AggregateFitError*>(&e)) doc["failures"] = agg->failures();
  err << "despd " << command << ": " << e.what() << "\n";
  try {
    write_artifacts(cfg.out_dir, {{"error.json", dump(doc)}});
  } catch (const std::exception& io) {
    err << "despd: " << io.what() << "\n";
  }
  return kExitSolver;
}

SupportGrid make_grid(const std::vector<OptionQuote>& quotes, const RunConfig& cfg) {
  if (cfg.grid_range) {
    return SupportGrid::uniform(cfg.grid_range->first, cfg.grid_range->second, cfg.grid_size);
  }
  return SupportGrid::covering(quotes, cfg.grid_size, cfg.grid_pad);
}

std::string_view weighting_name(Weighting w) {
  return w == Weighting::Homoscedastic ? "homo" : "price-strike";
}

ordered_json config_json(const RunConfig& cfg) {
  return {{"penalty_order", cfg.fit.penalty_order},
          {"lambda_policy", describe(cfg.fit.lambda_policy)},
          {"constrained", cfg.fit.constrain_sum_to_one},
          {"weights", weighting_name(cfg.fit.weighting)},
          {"eta_init", cfg.fit.eta_init == EtaInit::FlatUniform ? "flat" : "moment"},
          {"irls_max_iter", cfg.fit.irls_max_iter},
          {"irls_rel_tol", cfg.fit.irls_rel_tol}};
}

ordered_json grid_json(const SupportGrid& grid) {
  return {{"size", grid.size()}, {"lo", grid.front()}, {"hi", grid.back()},
          {"spacing", grid.spacing()}};
}

ordered_json chain_json(const fs::path& path, const Chain& chain) {
  ordered_json dropped = ordered_json::array();
  for (const auto& d : chain.dropped) dropped.push_back({{"line", d.line}, {"reason", d.reason}});
  const auto& m = chain.metadata;
  return {{"file", path.filename().string()},
          {"observation_date", m.observation_date},
          {"rate", m.rate},
          {"tau", m.tau},
          {"spot", m.spot ? ordered_json(*m.spot) : ordered_json(nullptr)},
          {"discount_scale", m.discount_scale()},
          {"rows", chain.data_rows},
          {"quotes_used", chain.quotes.size()},
          {"dropped", dropped}};
}

/// Renders a table whose cells are either strings or doubles.
class TableWriter {
 public:
  explicit TableWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  using Cell = std::variant<std::string, double, long long, bool>;

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }

  std::string render(OutputFormat format) const {
    if (format == OutputFormat::Csv) {
      std::ostringstream o;
      for (std::size_t c = 0; c < header_.size(); ++c) o << (c ? "," : "") << header_[c];
      o << "\n";
      for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c) o << ",";
          std::visit(
              [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                  o << format_double(v);
                } else if constexpr (std::is_same_v<T, bool>) {
                  o << (v ? 1 : 0);
                } else {
                  o << v;
                }
              },
              row[c]);
        }
        o << "\n";
      }
      return o.str();
    }
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows_) {
      ordered_json obj = ordered_json::object();
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) {
                obj[header_[c]] = number(v);
              } else {
                obj[header_[c]] = v;
              }
            },
            row[c]);
      }
      arr.push_back(std::move(obj));
    }
    return dump(arr);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

std::string ext(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".json"; }

// ---------------------------------------------------------------- fit

int cmd_fit(const fs::path& chain_path, const RunConfig& cfg, std::ostream& out,
            std::ostream& err) {
  const Chain chain = ingest(chain_path);
  for (const auto& d : chain.dropped) {
    err << "despd fit: dropped line " << d.line << " (" << d.reason << ")\n";
  }
  const SupportGrid grid = make_grid(chain.quotes, cfg);

  std::optional<SpdFit> fitted;
  std::optional<diag::LoocvResult> loocv;
  try {
    fitted.emplace(despd::fit(chain.quotes, grid, cfg.fit));
    if (cfg.loocv) {
      loocv = diag::loocv_rmse(*fitted, cfg.fit, {cfg.loocv_reselect, cfg.threads});
    }
  } catch (const Error& e) {
    return solver_failure("fit", cfg, e, err);
  }
  const SpdFit& fit = *fitted;

  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd sd_phi = Eigen::VectorXd::Constant(m, std::nan(""));
  std::vector<std::string> warnings = fit.warnings;
  try {
    const Eigen::MatrixXd cov = covariance_phi(fit);
    for (Eigen::Index j = 0; j < m; ++j) sd_phi(j) = std::sqrt(std::max(0.0, cov(j, j)));
  } catch (const Error& e) {
    warnings.push_back(std::string("covariance unavailable: ") + e.what());
  }

  TableWriter spd({"u", "phi", "density", "sd_phi"});
  const Eigen::VectorXd density = fit.density();
  for (Eigen::Index j = 0; j < m; ++j) {
    spd.add({grid[static_cast<std::size_t>(j)], fit.phi(j), density(j), sd_phi(j)});
  }

  TableWriter prices({"side", "strike", "observed", "fitted", "std_residual"});
  const double sigma = std::sqrt(fit.sigma2);
  for (std::size_t i = 0; i < fit.quotes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double resid = fit.observed(k) - fit.fitted_prices(k);
    prices.add({std::string(to_string(fit.quotes[i].side)), fit.quotes[i].strike, fit.observed(k),
                fit.fitted_prices(k), resid * std::sqrt(fit.weights(k)) / sigma});
  }

  const auto audit = diag::arbitrage_audit(fit);
  ordered_json summary = {
      {"command", "fit"},
      {"chain", chain_json(chain_path, chain)},
      {"config", config_json(cfg)},
      {"grid", grid_json(grid)},
      {"converged", fit.converged},
      {"lambda", number(fit.lambda)},
      {"effective_dimension", number(fit.effective_dimension)},
      {"sigma2", number(fit.sigma2)},
      {"sigma2_random", number(fit.sigma2_random)},
      {"objective", number(fit.objective)},
      {"iterations", fit.iterations},
      {"selection_iterations", fit.selection_iterations},
      {"max_inner_iterations", fit.max_inner_iterations},
      {"lagrange_omega", fit.lagrange_omega ? number(*fit.lagrange_omega) : ordered_json(nullptr)},
      {"mass", fit.phi.sum()},
      {"arbitrage", ordered_json::parse(diag::to_json(audit))},
      {"warnings", warnings}};
  if (loocv) {
    summary["loocv"] = {{"rmse", number(loocv->rmse)},
                        {"folds", loocv->folds},
                        {"failed_folds", loocv->failed_folds},
                        {"reselect_lambda", cfg.loocv_reselect},
                        {"failures", loocv->failures}};
  } else {
    summary["loocv"] = nullptr;
  }

  write_artifacts(cfg.out_dir, {{"spd" + ext(cfg.format), spd.render(cfg.format)},
                                {"prices" + ext(cfg.format), prices.render(cfg.format)},
                                {"summary.json", dump(summary)}});
  out << "lambda=" << format_double(fit.lambda)
      << " ed=" << format_double(fit.effective_dimension)
      << " converged=" << (fit.converged ? "true" : "false")
      << " audit=" << (audit.all_pass() ? "pass" : "fail") << "\n";
  if (!fit.converged) {
    err << "despd fit: did not converge; artifacts written\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- lambda-grid

int cmd_lambda_grid(const fs::path& chain_path, const RunConfig& cfg, std::ostream& out,
                    std::ostream& err) {
  if (!std::holds_alternative<AicGrid>(cfg.fit.lambda_policy)) {
    throw InvalidInput("lambda-grid needs --lambda aic:<lo>:<hi>:<count>");
  }
  const Chain chain = ingest(chain_path);
  const SupportGrid grid = make_grid(chain.quotes, cfg);

  std::optional<AicSelection> sel;
  try {
    sel.emplace(select_lambda_aic(chain.quotes, grid, cfg.fit));
  } catch (const Error& e) {
    return solver_failure("lambda-grid", cfg, e, err);
  }

  TableWriter profile({"log10_lambda", "lambda", "aic", "effective_dimension", "weighted_rss",
                       "iterations", "converged", "error"});
  for (const auto& p : sel->profile) {
    profile.add({p.log10_lambda, p.lambda, p.aic, p.effective_dimension, p.weighted_rss,
                 static_cast<long long>(p.iterations), p.converged, p.error});
  }
  const SpdFit& best = sel->best;
  ordered_json summary = {{"command", "lambda-grid"},
                          {"chain", chain_json(chain_path, chain)},
                          {"config", config_json(cfg)},
                          {"grid", grid_json(grid)},
                          {"best_lambda", number(best.lambda)},
                          {"best_log10_lambda", number(std::log10(best.lambda))},
                          {"best_aic", number(aic(best))},
                          {"effective_dimension", number(best.effective_dimension)},
                          {"converged", best.converged}};
  write_artifacts(cfg.out_dir, {{"aic_profile" + ext(cfg.format), profile.render(cfg.format)},
                                {"lambda_grid.json", dump(summary)}});
  out << "best lambda=" << format_double(best.lambda) << " aic=" << format_double(aic(best))
      << "\n";
  return best.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, int replicates, const std::string& noise, std::ostream& out,
                 std::ostream& err) {
  sim::StudyConfig study;
  study.replicates = replicates;
  study.master_seed = cfg.seed;
  study.fit = cfg.fit;
  study.grid_size = cfg.grid_size;
  study.grid_pad = cfg.grid_pad;
  study.threads = cfg.threads;
  using sim::NoiseScale;
  static const std::map<std::string, std::vector<NoiseScale>> regimes = {
      {"none", {NoiseScale::None}},
      {"half", {NoiseScale::Half}},
      {"full", {NoiseScale::Full}},
      {"both", {NoiseScale::Full, NoiseScale::Half}},
      {"all", {NoiseScale::Full, NoiseScale::Half, NoiseScale::None}}};
  study.regimes = regimes.at(noise);

  std::optional<sim::StudyReport> report;
  try {
    report.emplace(sim::run_study(study));
  } catch (const Error& e) {
    return solver_failure("simulate", cfg, e, err);
  }
  const std::string rows = cfg.format == OutputFormat::Csv ? sim::replicates_csv(*report)
                                                           : sim::replicates_json(*report);
  write_artifacts(cfg.out_dir,
                  {{"replicates" + ext(cfg.format), rows}, {"study.json", sim::study_json(*report)}});
  for (const auto& s : report->regimes) {
    out << to_string(s.regime) << ": median rmse=" << format_double(s.rmse.median)
        << " median rise=" << format_double(s.rise.median) << " failures=" << s.failures << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- pit

struct StoredSpd {
  std::vector<double> u;
  std::vector<double> phi;
};

std::optional<StoredSpd> load_spd(const fs::path& dir) {
  StoredSpd s;
  if (fs::exists(dir / "spd.csv")) {
    std::ifstream in(dir / "spd.csv", std::ios::binary);
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    const auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "u" || header[1] != "phi") return std::nullopt;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_fields(line);
      if (f.size() < 2) return std::nullopt;
      const auto u = parse_number(f[0]);
      const auto p = parse_number(f[1]);
      if (!u || !p) return std::nullopt;
      s.u.push_back(*u);
      s.phi.push_back(*p);
    }
    return s;
  }
  if (fs::exists(dir / "spd.json")) {
    std::ifstream in(dir / "spd.json", std::ios::binary);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) return std::nullopt;
    for (const auto& row : doc) {
      if (!row.contains("u") || !row.contains("phi") || !row["u"].is_number() ||
          !row["phi"].is_number()) {
        return std::nullopt;
      }
      s.u.push_back(row["u"].get<double>());
      s.phi.push_back(row["phi"].get<double>());
    }
    return s;
  }
  return std::nullopt;
}

std::vector<diag::Realization> load_realizations(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open realizations file " + path.string());
  std::vector<diag::Realization> out;
  std::string raw;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto fields = split_fields(raw);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (!fields[0].empty() && fields[0].front() == '#') continue;
    if (!have_header) {
      if (fields != std::vector<std::string>{"date", "price"}) {
        throw ParseError(line_no, "header must be exactly date,price");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields");
    const auto price = parse_number(fields[1]);
    if (!price || !std::isfinite(*price) || *price <= 0.0) {
      throw ParseError(line_no, "price must be a positive number");
    }
    out.push_back({fields[0], *price});
  }
  if (!have_header) throw ParseError(line_no, "no header line found");
  if (out.empty()) throw ParseError(line_no, "no realizations");
  return out;
}

struct PitOptions {
  fs::path fit_dir;
  fs::path realizations;
  int n_sim = 1000;
  double level = 0.95;
};

int cmd_pit(const PitOptions& opt, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto stored = load_spd(opt.fit_dir);
  if (!stored || stored->u.size() < SupportGrid::kMinPoints) {
    err << "despd pit: no readable spd.csv or spd.json in " << opt.fit_dir.string() << "\n";
    return kExitMissingArtifacts;
  }
  const auto realizations = load_realizations(opt.realizations);

  std::optional<diag::FittedCdf> cdf;
  try {
    const SupportGrid grid(stored->u);
    cdf.emplace(grid, Eigen::Map<const Eigen::VectorXd>(
                          stored->phi.data(), static_cast<Eigen::Index>(stored->phi.size())));
  } catch (const InvalidInput& e) {
    err << "despd pit: stored SPD is unusable: " << e.what() << "\n";
    return kExitMissingArtifacts;
  }

  const auto records = diag::pit_series(*cdf, realizations);
  std::vector<double> zs, xs;
  int saturated = 0;
  TableWriter pit({"observation_time", "realized_price", "z", "x", "saturated"});
  for (const auto& r : records) {
    pit.add({r.observation_time, r.realized_price, r.z, r.x, r.saturated});
    zs.push_back(r.z);
    if (r.saturated) {
      ++saturated;
    } else {
      xs.push_back(r.x);
    }
  }

  const double ks = diag::ks_uniform_distance(zs);
  const double crit = diag::ks_critical_1pct(zs.size());
  TableWriter qq({"theoretical_q", "empirical_q", "lower_band", "upper_band"});
  int inside = 0;
  if (!xs.empty()) {
    for (const auto& p : diag::qq_envelope(xs, opt.n_sim, opt.level, cfg.seed)) {
      qq.add({p.theoretical, p.empirical, p.lower, p.upper});
      if (p.empirical >= p.lower && p.empirical <= p.upper) ++inside;
    }
  }

  ordered_json summary = {
      {"command", "pit"},
      {"records", records.size()},
      {"saturated", saturated},
      {"median", cdf->median()},
      {"ks", {{"distance", ks}, {"critical_1pct", crit}, {"pass", ks <= crit}}},
      {"envelope",
       {{"points", xs.size()}, {"inside", inside}, {"n_sim", opt.n_sim}, {"level", opt.level},
        {"seed", cfg.seed}}}};
  write_artifacts(cfg.out_dir, {{"pit" + ext(cfg.format), pit.render(cfg.format)},
                                {"qq" + ext(cfg.format), qq.render(cfg.format)},
                                {"pit_summary.json", dump(summary)}});
  out << "records=" << records.size() << " saturated=" << saturated
      << " ks=" << format_double(ks) << " critical=" << format_double(crit) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- option plumbing

struct FlagValues {
  std::string lambda;
  std::string weights = "homo";
  std::string eta_init = "flat";
  std::string format = "csv";
  std::string grid_range;
};

void add_output_options(CLI::App* cmd, RunConfig& cfg, FlagValues& flags) {
  cmd->add_option("--out-dir", cfg.out_dir, "Directory for output files")->capture_default_str();
  cmd->add_option("--format", flags.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_fit_options(CLI::App* cmd, RunConfig& cfg, FlagValues& flags, bool with_range) {
  cmd->add_option("--grid-size", cfg.grid_size, "Number of support atoms")->capture_default_str();
  if (with_range) {
    cmd->add_option("--grid-range", flags.grid_range, "Support range lo:hi (default: padded strikes)");
  }
  cmd->add_option("--grid-pad", cfg.grid_pad, "Padding as a fraction of the strike range")
      ->capture_default_str();
  cmd->add_option("--penalty-order", cfg.fit.penalty_order, "Difference penalty order")
      ->capture_default_str();
  cmd->add_option("--lambda", flags.lambda,
                  "fixed:<v> | schall[:<initial>] | aic:<lo>:<hi>:<count> (log10 grid)")
      ->capture_default_str();
  cmd->add_flag("--constrain,!--no-constrain", cfg.fit.constrain_sum_to_one,
                "Force the masses to sum to one");
  cmd->add_option("--weights", flags.weights, "Observation weights")
      ->check(CLI::IsMember({"homo", "price-strike"}))
      ->capture_default_str();
  cmd->add_option("--eta-init", flags.eta_init, "Starting values for log-masses")
      ->check(CLI::IsMember({"flat", "moment"}))
      ->capture_default_str();
  cmd->add_option("--max-iter", cfg.fit.irls_max_iter, "IRLS iteration limit")
      ->capture_default_str();
  cmd->add_option("--tol", cfg.fit.irls_rel_tol, "IRLS relative objective tolerance")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void apply_flags(RunConfig& cfg, const FlagValues& flags) {
  cfg.fit.lambda_policy = parse_lambda_policy(flags.lambda);
  cfg.fit.weighting =
      flags.weights == "homo" ? Weighting::Homoscedastic : Weighting::PriceStrikeRatio;
  cfg.fit.eta_init = flags.eta_init == "flat" ? EtaInit::FlatUniform : EtaInit::LogGaussianMoment;
  cfg.format = flags.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  if (!flags.grid_range.empty()) cfg.grid_range = parse_grid_range(flags.grid_range);
}

double parse_field(const std::string& text, const std::string& what) {
  const auto v = parse_number(text);
  if (!v || !std::isfinite(*v)) throw InvalidInput("bad " + what + ": '" + text + "'");
  return *v;
}

std::vector<std::string> split_colon(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto c = text.find(':', start);
    parts.push_back(text.substr(start, c - start));
    if (c == std::string::npos) break;
    start = c + 1;
  }
  return parts;
}

}  // namespace

void RunConfig::validate() const {
  fit.validate();
  if (grid_size < SupportGrid::kMinPoints) throw InvalidInput("grid size must be at least 4");
  if (grid_range) {
    const auto [lo, hi] = *grid_range;
    if (!(lo > 0.0 && hi > lo && std::isfinite(hi))) {
      throw InvalidInput("grid range needs 0 < lo < hi");
    }
  }
  if (!(grid_pad >= 0.0 && std::isfinite(grid_pad))) throw InvalidInput("grid pad must be >= 0");
  if (out_dir.empty()) throw InvalidInput("output directory must not be empty");
}

LambdaPolicy parse_lambda_policy(const std::string& text) {
  const auto parts = split_colon(text);
  if (parts[0] == "fixed" && parts.size() == 2) {
    return FixedLambda{parse_field(parts[1], "lambda")};
  }
  if (parts[0] == "schall" && parts.size() <= 2) {
    SchallEm p;
    if (parts.size() == 2) p.initial = parse_field(parts[1], "initial lambda");
    return p;
  }
  if (parts[0] == "aic" && parts.size() == 4) {
    const double lo = parse_field(parts[1], "log10 lambda");
    const double hi = parse_field(parts[2], "log10 lambda");
    const double count = parse_field(parts[3], "grid count");
    if (count < 1.0 || count != std::floor(count) || count > 10000.0) {
      throw InvalidInput("aic grid count must be a positive integer");
    }
    return AicGrid::linspace(lo, hi, static_cast<int>(count));
  }
  throw InvalidInput("--lambda must be fixed:<v>, schall[:<initial>] or aic:<lo>:<hi>:<count>");
}

std::string describe(const LambdaPolicy& policy) {
  if (const auto* f = std::get_if<FixedLambda>(&policy)) return "fixed:" + format_double(f->value);
  if (const auto* s = std::get_if<SchallEm>(&policy)) {
    return "schall:" + format_double(s->initial);
  }
  const auto& g = std::get<AicGrid>(policy).log10_lambdas;
  if (g.empty()) return "aic";
  return "aic:" + format_double(g.front()) + ":" + format_double(g.back()) + ":" +
         std::to_string(g.size());
}

std::pair<double, double> parse_grid_range(const std::string& text) {
  const auto parts = split_colon(text);
  if (parts.size() != 2) throw InvalidInput("--grid-range must be lo:hi");
  return {parse_field(parts[0], "grid range"), parse_field(parts[1], "grid range")};
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arbitrage-free state price density estimation from option quotes", "despd"};
  app.require_subcommand(1);

  RunConfig fit_cfg, grid_cfg, sim_cfg, pit_cfg;
  FlagValues fit_flags, grid_flags, sim_flags, pit_flags;
  fit_flags.lambda = sim_flags.lambda = "schall";
  grid_flags.lambda = "aic:-4:10:57";
  fs::path fit_chain, grid_chain;

  auto* fit = app.add_subcommand("fit", "Fit the SPD of one option chain");
  fit->add_option("chain", fit_chain, "Chain CSV file")->required();
  add_fit_options(fit, fit_cfg, fit_flags, true);
  add_output_options(fit, fit_cfg, fit_flags);
  fit->add_flag("--loocv", fit_cfg.loocv, "Also compute the leave-one-out pricing error");
  fit->add_flag("--loocv-reselect", fit_cfg.loocv_reselect,
                "Reselect lambda inside every LOOCV fold");

  auto* grid = app.add_subcommand("lambda-grid", "AIC profile over a log10 lambda grid");
  grid->add_option("chain", grid_chain, "Chain CSV file")->required();
  add_fit_options(grid, grid_cfg, grid_flags, true);
  add_output_options(grid, grid_cfg, grid_flags);

  int replicates = 1000;
  std::string noise = "both";
  auto* simulate = app.add_subcommand("simulate", "Run the log-normal mixture recovery study");
  add_fit_options(simulate, sim_cfg, sim_flags, false);
  add_output_options(simulate, sim_cfg, sim_flags);
  simulate->add_option("--replicates", replicates, "Replicates per noise regime")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--noise", noise, "Noise regimes")
      ->check(CLI::IsMember({"none", "half", "full", "both", "all"}))
      ->capture_default_str();
  simulate->add_option("--seed", sim_cfg.seed, "Master seed")->capture_default_str();

  PitOptions pit_opt;
  auto* pit = app.add_subcommand("pit", "Probability integral transforms of realized prices");
  pit->add_option("--fit-dir", pit_opt.fit_dir, "Directory holding a previous fit's spd file")
      ->required();
  pit->add_option("--realizations", pit_opt.realizations, "CSV with header date,price")
      ->required();
  pit->add_option("--n-sim", pit_opt.n_sim, "Simulated samples for the QQ envelope")
      ->capture_default_str();
  pit->add_option("--level", pit_opt.level, "QQ envelope coverage")->capture_default_str();
  pit->add_option("--seed", pit_cfg.seed, "Seed of the envelope simulation")->capture_default_str();
  add_output_options(pit, pit_cfg, pit_flags);

  std::vector<const char*> args;
  args.reserve(argv.size());
  for (const auto& a : argv) args.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      apply_flags(fit_cfg, fit_flags);
      fit_cfg.validate();
      return cmd_fit(fit_chain, fit_cfg, out, err);
    }
    if (grid->parsed()) {
      apply_flags(grid_cfg, grid_flags);
      grid_cfg.validate();
      return cmd_lambda_grid(grid_chain, grid_cfg, out, err);
    }
    if (simulate->parsed()) {
      apply_flags(sim_cfg, sim_flags);
      sim_cfg.validate();
      return cmd_simulate(sim_cfg, replicates, noise, out, err);
    }
    pit_cfg.format = pit_flags.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    if (pit_opt.n_sim < 2) throw InvalidInput("--n-sim must be at least 2");
    if (!(pit_opt.level > 0.0 && pit_opt.level < 1.0)) {
      throw InvalidInput("--level must be in (0, 1)");
    }
    return cmd_pit(pit_opt, pit_cfg, out, err);
  } catch (const Error& e) {
    // Input, configuration and parse problems; solver failures are handled
    // inside the commands.
    err << "despd: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "despd: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace despd::cli
