#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dcopt/linesearch.hpp"
#include "dcopt/problem.hpp"
#include "dcopt/subproblem.hpp"

namespace dcopt {

// Outer-loop variants. The *_nls solvers pair the non-monotone search with
// the search-determined extrapolation update; the others are the comparison
// set: plain DC iteration, DC iteration with monotone backtracking, and the
// proximal family with FISTA extrapolation and restart policies.
enum class Algorithm {
  NpDcaeNls,
  PDcaeNls,
  Dca,
  BdcaLs,
  PDca,
  PDcaNls,
  PDcaeFixed,
  PDcaeAdaptive,
  PDcaeNoRestart,
  NpDcae,
};

enum class LineSearchMode { None, NonMonotone, Monotone };

struct AlgorithmShape {
  SubproblemForm form;
  ExtrapolationPolicy extrapolation;
  LineSearchMode search;
};

AlgorithmShape algorithm_shape(Algorithm a);
std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct Termination {
  enum class Kind { RelChange, StepNorm, GradNorm, DiceBound };
  Kind kind = Kind::RelChange;
  double epsilon = 1e-6;
  double dice_threshold = 0.985;
  std::shared_ptr<const std::vector<bool>> truth;  // DiceBound ground truth

  static Termination rel_change(double eps);
  static Termination step_norm(double eps);
  static Termination grad_norm(double eps);
  static Termination dice_bound(std::shared_ptr<const std::vector<bool>> truth,
                                double threshold = 0.985);
};

// Applies the configured rule to the latest update x_old -> x_new.
bool check_termination(const Termination& rule, const Vector& x_new,
                       const Vector& x_old, const DcProblem& prob);

enum class TraceLevel { Light, Full };

struct SolverConfig {
  Algorithm algorithm = Algorithm::NpDcaeNls;
  LineSearchParams line_search;
  LsdeParams lsde;
  Preconditioner precond;
  Termination termination;
  long max_iter = 200000;
  int fista_fixed_period = 200;
  TraceLevel trace_level = TraceLevel::Light;
  Vector x0;  // empty selects the origin
  // When set, every row records ||x^{n+1} - ref||.
  std::shared_ptr<const Vector> distance_ref;
};

struct TraceRow {
  long n = 0;
  double energy = 0.0;       // E(x^{n+1}), as evaluated by the accepting search
  double energy_xbar = 0.0;  // E(xbar^n)
  double lyap_a = std::numeric_limits<double>::quiet_NaN();
  double lyap_h = std::numeric_limits<double>::quiet_NaN();
  double d_norm = 0.0;       // ||xbar^n - x^n||
  double step_norm = 0.0;    // ||x^{n+1} - x^n||
  double lambda = 0.0;
  double beta = 0.0;         // beta_n used to form y^n
  double beta_next = 0.0;    // beta_{n+1} produced by this iteration
  int a_n = 0;               // line-search trials; 0 when no search ran
  int delta_lambda = 0;      // 1 if lambda_n > 0
  double crit_residual = std::numeric_limits<double>::quiet_NaN();
  double nu = 0.0;
  double dist_ref = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;      // elapsed since the loop started
};

enum class SolveStatus { Converged, MaxIter, StationaryDZero, NanAbort };

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIter;
  long iterations = 0;
  Vector x;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double wall_seconds = 0.0;
  long nan_iteration = -1;

  // run-level diagnostics
  double c_lambda_value = 0.0;  // Lsde runs only
  double mu_min_m = 0.0;
  long n0 = 0;                  // eventual-monotonicity threshold
  double lyapunov_scale = 1.0;
  bool metric_known = false;

  std::vector<std::string> warnings;
  std::vector<TraceRow> trace;
};

SolveReport solve(const DcProblem& prob, const SolverConfig& config);

}  // namespace dcopt
