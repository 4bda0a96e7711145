#pragma once

#include <vector>

#include "dcopt/problem.hpp"

namespace dcopt {

// A(x, ybar, y) = E(x) + (scale/2) ||ybar - y||_M^2. scale is 1 for the
// implicit-form solvers and L for the linearized form. M may be null (M = 0).
double lyapunov_a(const DcProblem& prob, const Vector& x_next,
                  const Vector& xbar, const Vector& x_n, const SymOperator* m,
                  double scale);

// H(x, w, ybar, y) = f(x) + <x,w> - g1*(w) - g2(x)
//                    + scale * sigma/2 ||x - ybar||^2
//                    + scale/2 ||ybar - y||_M^2,
// with g1*(w) evaluated through the Fenchel equality at the pair
// (xbar, w_bar), which requires w_bar in dg1(xbar).
double lyapunov_h(const DcProblem& prob, const Vector& x_next,
                  const Vector& w_bar, const Vector& xbar, const Vector& x_n,
                  const SymOperator* m, double sigma, double scale);

// Distance to first-order criticality. Smooth energies report the gradient
// norm; an l1-type g1 reports the minimal-norm element of
// grad f - grad g2 + mu * d||.||_1 coordinatewise.
double criticality_residual(const DcProblem& prob, const Vector& x);

enum class RateRegime { Linear, Sublinear, Finite, NoFit };

struct RateFit {
  RateRegime regime = RateRegime::NoFit;
  double eta_hat = 0.0;  // per-iteration contraction estimate
  double r_squared = 0.0;
  int points_used = 0;
};

// Least-squares slope of log ||x^n - x_final|| over the last third of the
// run, excluding the final 5 points (they are contaminated by the stopping
// rule). Linear when eta_hat in (0,1) with R^2 >= 0.9; Finite when the
// iterates hit x_final exactly.
RateFit fit_local_rate(const std::vector<double>& dist_to_final);

}  // namespace dcopt
