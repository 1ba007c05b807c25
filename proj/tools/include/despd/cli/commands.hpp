#pragma once

#include "despd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace despd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNotConverged = 2,
  kExitSolver = 3,
  kExitMissingArtifacts = 4,
};

enum class OutputFormat { Csv, Json };

/// Everything a subcommand needs besides its input files.
struct RunConfig {
  FitConfig fit;
  std::size_t grid_size = 200;
  /// Explicit [lo, hi]; otherwise the strikes padded by grid_pad of their range.
  std::optional<std::pair<double, double>> grid_range;
  double grid_pad = 0.25;
  std::filesystem::path out_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t seed = 1;
  bool loocv = false;
  bool loocv_reselect = false;
  unsigned threads = 0;

  /// Throws InvalidInput.
  void validate() const;
};

/// Parses fixed:<v>, schall, schall:<initial> or aic:<lo>:<hi>:<count>.
LambdaPolicy parse_lambda_policy(const std::string& text);
std::string describe(const LambdaPolicy& policy);

/// Parses "lo:hi".
std::pair<double, double> parse_grid_range(const std::string& text);

/// Full command line entry point; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace despd::cli
