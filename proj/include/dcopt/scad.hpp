#pragma once

#include <cstdint>
#include <memory>

#include "dcopt/problem.hpp"

namespace dcopt {

struct ScadParams {
  double mu = 5e-4;     // sparsity weight
  double theta = 10.0;  // concavity, > 1
  double alpha = -1.0;  // Huber knee; <= 0 selects the 0.5*mu default

  double knee() const { return alpha > 0.0 ? alpha : 0.5 * mu; }
  void validate() const;
};

// Per-coordinate concave correction tilde_s: 0 on |x| <= mu, quadratic on
// mu < |x| < theta*mu, affine beyond. Continuous with derivative
// sign(x) [min(theta*mu, |x|) - mu]_+ / (theta - 1).
double tilde_s(double x, const ScadParams& p);
double tilde_s_grad(double x, const ScadParams& p);

// S(x) = mu ||x||_1 - sum_i tilde_s(x_i)
double scad_value(const Vector& x, const ScadParams& p);

// Huber surrogate for |x|: quadratic inside the knee, affine outside.
double huber(double x, double alpha);
double huber_grad(double x, double alpha);

// Composite penalty s_M(x) = mu * huber(x, alpha) - tilde_s(x), piecewise
// over |x| in [0, alpha], (alpha, mu], (mu, theta*mu), [theta*mu, inf).
double huber_scad(double x, const ScadParams& p);
double huber_scad_grad(double x, const ScadParams& p);

// mu * huber(., alpha) as a scalar convex penalty with closed-form prox.
class HuberScalar final : public ScalarConvex {
 public:
  HuberScalar(double weight, double alpha);
  double value(double x) const override;
  double subgrad(double x) const override;
  bool has_prox() const override { return true; }
  double prox(double z, double t) const override;
  bool smooth() const override { return true; }
  double grad_lipschitz() const override { return w_ / alpha_; }

 private:
  double w_, alpha_;
};

struct LeastSquaresData {
  std::shared_ptr<const Matrix> a;  // m x k
  Vector b;                         // m
  double lambda_ata = 0.0;          // inflated largest eigenvalue of A^T A

  Index samples() const { return a->rows(); }
  Index features() const { return a->cols(); }
};

// Caches lambda_ata = 1.01 * power-iteration estimate so the spectral-gap
// preconditioner stays positive semidefinite under estimation error.
LeastSquaresData make_least_squares(Matrix a, Vector b);

struct SyntheticSpec {
  int m = 300;
  int k = 1000;
  int sparsity = 50;
  double noise_std = 0.01;
};

// Design with N(0,1)/sqrt(m) entries, +-1 ground truth on `sparsity` random
// coordinates, b = A x# + noise.
LeastSquaresData synthetic_instance(const SyntheticSpec& spec,
                                    std::uint64_t seed,
                                    Vector* ground_truth = nullptr);

enum class ScadVariant { L1, Huber };
enum class ScadSplit { Standard, Bdca };

// Standard split: f = 0.5||Ax-b||^2, g1 = penalty, g2 = sum tilde_s.
// Bdca split: f = 0, g1 = penalty + (lambda_ata/2)||x||^2,
//             g2 = (lambda_ata/2)||x||^2 + sum tilde_s - 0.5||Ax-b||^2,
// which makes each plain DC step explicit. Both splits evaluate to the same
// energy.
DcProblem build_scad_problem(std::shared_ptr<const LeastSquaresData> data,
                             const ScadParams& p, ScadVariant variant,
                             ScadSplit split);

}  // namespace dcopt
