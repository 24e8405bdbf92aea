#pragma once

// Experiment runner behind the sgdg executable.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgdg/sparse_space.hpp"

namespace sgdg {

struct ExperimentConfig {
  enum class Mode { Project, Solve };

  Mode mode = Mode::Solve;
  std::string problem;
  std::optional<int> dim;  ///< required for exp_prod; otherwise taken from the problem
  int degree = 1;
  int n_min = 1;
  int n_max = 4;
  SpaceKind kind = SpaceKind::VHat;
  double sigma = 0.0;  ///< 0 means the default for (d, k)
  int iquad = 7;
  int error_points = 0;  ///< Gauss points per coordinate and cell for the norms; 0 means the library default
  std::string out;  ///< display CSV path; empty means stdout
  bool export_matrix = false;
  bool cond = true;
  int threads = 0;
  std::int64_t dof_cap = kDefaultDofCap;
  bool quiet = false;
};

struct ExperimentRow {
  int n = 0;
  std::int64_t sgdof = 0;
  std::int64_t fgdof = 0;
  double l1 = 0.0, l2 = 0.0, linf = 0.0, h1 = 0.0;
  std::optional<double> o_l1, o_l2, o_linf, o_h1;
  // solve mode only
  std::int64_t nnz = 0;
  std::int64_t nnz_stored = 0;
  double nnz_order = 0.0;
  std::optional<double> cond;
  int iterations = 0;
  double min_ritz = 0.0;
  double sigma = 0.0;
  double seconds = 0.0;
};

/// Parses "A..B" or "A"; throws ConfigError.
std::pair<int, int> parse_level_range(const std::string& text);

/// Runs the experiment and writes rows as they complete, to cfg.out or else
/// to `table`.  Throws the library's exception types on failure; rows
/// already written stay on disk.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, std::ostream& table, std::ostream& log);

/// Full command line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgdg
