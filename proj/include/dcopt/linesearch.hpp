#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dcopt/operators.hpp"

namespace dcopt {

// Denominator p(n) of the non-monotonicity budget nu_n = omega/p(n) ||d||^2.
enum class PSchedule { Linear, Sqrt, Quadratic };

double p_value(PSchedule s, long n);

struct LineSearchParams {
  double lambda_max = 2.0;
  double rho = 0.3;       // backtracking factor, in (0,1)
  double eta = 2.9;       // sufficient-decrease coefficient
  double omega = 0.9;     // non-monotonicity budget
  int max_trials = 3;     // N_max
  double min_step = 1e-8; // trial steps below this fail the search
  PSchedule schedule = PSchedule::Linear;

  void validate() const;
};

// nu_n = omega * ||d||^2 / p(n)
double nu_schedule(long n, double omega, double d_norm_sq,
                   PSchedule s = PSchedule::Linear);

// First n with omega / p(n) < eta * lambda_max * rho^max_trials: past it every
// accepted step decreases the energy relative to the search anchor.
long monotonicity_threshold(const LineSearchParams& p);

struct LineSearchResult {
  bool accepted = false;
  double lambda = 0.0;  // 0 on failure
  int trials = 0;       // a(n); max_trials + 1 on failure
  double nu = 0.0;
  double trial_energy = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> trial_energies;  // energy at every trial, k = 1, 2, ...
};

using EnergyFn = std::function<double(const Vector&)>;
using RayEnergyFn = std::function<double(double)>;  // lambda -> E(xbar + lambda d)

// Backtracking trials lambda = rho^{k-1} lambda_max, k = 1, 2, ..., accepting
// the first k with
//   E(xbar + lambda d) <= E(xbar) - eta lambda ||d||^2 + nu_n.
// A trial energy of NaN aborts the run: it signals a modeling bug, not a
// search failure.
LineSearchResult nonmonotone_search(const EnergyFn& energy, const Vector& xbar,
                                    double energy_at_xbar, const Vector& d,
                                    long n, const LineSearchParams& p);

// Same search with the energy parameterized along the ray; used by solvers
// that can evaluate E(xbar + lambda d) cheaply.
LineSearchResult nonmonotone_search_ray(const RayEnergyFn& energy_at,
                                        double energy_at_xbar,
                                        double d_norm_sq, long n,
                                        const LineSearchParams& p);

struct LsdeParams {
  double b1 = 1e-3;  // > 0, close to 0
  double b2 = 0.0;   // in [0, 1), close to 0

  void validate() const;
};

// beta_{n+1} from the search outcome: 1/(1 + b1 + lambda_n) on success, b2 on
// failure.
double lsde_update(const LineSearchResult& r, const LsdeParams& p);

// Lower bound on 1/(1+lambda_n)^2 - beta_{n+1}^2 over every reachable pair:
// min of b1(1+b1)/((1+lambda_max)^2 (1+b1+lambda_max)^2) and (1-b2^2)/2.
double c_lambda(const LsdeParams& p, double lambda_max);

enum class ExtrapolationPolicy {
  None,
  Lsde,
  FistaNoRestart,
  FistaFixedRestart,
  FistaAdaptiveRestart,
};

struct ExtrapolationState {
  ExtrapolationPolicy policy = ExtrapolationPolicy::None;
  double beta = 0.0;
  double theta_prev = 1.0;
  double theta = 1.0;
  int fixed_period = 200;  // restart period for FistaFixedRestart
};

// One step of the beta recursion beta_{n+1} = (theta_n - 1)/theta_{n+1},
// theta_{n+1} = (1 + sqrt(1 + 4 theta_n^2))/2, with theta reset to 1 on
// restart (fixed period or adaptive signal).
ExtrapolationState fista_beta_step(ExtrapolationState s, bool restart_signal,
                                   long iteration);

// <y_n - x_next, x_next - x_n> > 0
bool adaptive_restart_signal(const Vector& y_n, const Vector& x_next,
                             const Vector& x_n);

}  // namespace dcopt
