#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcopt/io.hpp"
#include "dcopt/solver.hpp"

namespace dcopt {

// Invalid configurations surface as this type; the CLI maps it to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  nlohmann::json problem;  // problem block, dispatched on "kind"
  std::vector<std::string> algorithms;
  std::string profile = "scad";  // "scad" | "gl" | "none"
  nlohmann::json overrides;      // optional solver parameter overrides
  std::string termination = "rel_change";
  std::vector<double> tolerances;
  double dice_threshold = 0.985;
  long max_iter = 200000;
  std::string precond;  // "" selects a per-problem default
  int jacobi_sweeps = 5;
  double cg_tol = 1e-11;
  int cg_max_inner = 20000;
  std::string trace_level = "light";
  bool rate_plot = false;
  std::string out_dir = "results";
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Named parameter profiles for the two benchmark families.
LineSearchParams profile_line_search(const std::string& profile);

struct ExperimentResult {
  int exit_code = 0;  // 0 ok, 3 when any cell aborted on NaN
  std::vector<ReportCell> cells;
  std::vector<std::string> trace_paths;
};

// Runs the algorithms-by-tolerances grid, writing one trace CSV per cell and
// a consolidated report.json. Cells run concurrently up to `workers`.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir, int workers = 1,
                                std::optional<std::uint64_t> seed_override = {});

// (n, log10 ||x^n - x_final||, log10 (E(x^n) - E_final), warn) rows for
// plotting; requires a trace recorded with a distance reference.
std::string rate_plot_csv(const TraceFile& trace);

}  // namespace dcopt
