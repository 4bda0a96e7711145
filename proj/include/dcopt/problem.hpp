#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "dcopt/operators.hpp"

namespace dcopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// F(x) = 0.5 <x, Qx> - <q, x> + c, so grad F(x) = Qx - q.
struct QuadraticForm {
  std::shared_ptr<const SymOperator> hessian;
  Vector linear;   // q
  double constant = 0.0;

  double value(const Vector& x) const {
    return 0.5 * x.dot(hessian->apply(x)) - linear.dot(x) + constant;
  }
  Vector gradient(const Vector& x) const { return hessian->apply(x) - linear; }
};

// Scalar convex function h: R -> R with a deterministic subgradient choice
// and (where supported) a closed-form proximal map.
class ScalarConvex {
 public:
  virtual ~ScalarConvex() = default;
  virtual double value(double x) const = 0;
  virtual double subgrad(double x) const = 0;
  // Subgradient used as an upper-bound witness: at a kink of the anchor, the
  // tie resolves toward the query point.
  virtual double witness(double anchor, double query) const {
    (void)query;
    return subgrad(anchor);
  }
  virtual bool has_prox() const { return false; }
  // argmin_u h(u) + (u - z)^2 / (2t)
  virtual double prox(double z, double t) const {
    (void)z; (void)t;
    throw std::logic_error("scalar function has no proximal map");
  }
  virtual bool smooth() const = 0;
  virtual double grad_lipschitz() const = 0;
};

class ZeroScalar final : public ScalarConvex {
 public:
  double value(double) const override { return 0.0; }
  double subgrad(double) const override { return 0.0; }
  bool has_prox() const override { return true; }
  double prox(double z, double) const override { return z; }
  bool smooth() const override { return true; }
  double grad_lipschitz() const override { return 0.0; }
};

// weight * |x|
class AbsScalar final : public ScalarConvex {
 public:
  explicit AbsScalar(double weight) : w_(weight) {
    if (w_ < 0) throw std::invalid_argument("abs penalty weight must be >= 0");
  }
  double value(double x) const override { return w_ * std::abs(x); }
  double subgrad(double x) const override {
    return x > 0 ? w_ : (x < 0 ? -w_ : 0.0);
  }
  double witness(double anchor, double query) const override {
    if (anchor != 0.0) return subgrad(anchor);
    return query > 0 ? w_ : (query < 0 ? -w_ : 0.0);
  }
  bool has_prox() const override { return true; }
  double prox(double z, double t) const override {
    double s = w_ * t;
    if (z > s) return z - s;
    if (z < -s) return z + s;
    return 0.0;
  }
  bool smooth() const override { return w_ == 0.0; }
  double grad_lipschitz() const override { return 0.0; }
  double weight() const { return w_; }

 private:
  double w_;
};

// Convex function g: R^dim -> R with value and one-subgradient oracles. The
// subgradient oracle is deterministic. Structure hooks (quadratic form,
// separable scalar + quadratic term) drive the subproblem solvers.
class ConvexFn {
 public:
  virtual ~ConvexFn() = default;
  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector subgradient(const Vector& x) const = 0;
  virtual Vector witness_subgradient(const Vector& anchor,
                                     const Vector& query) const {
    (void)query;
    return subgradient(anchor);
  }
  virtual bool smooth() const = 0;
  virtual double grad_lipschitz() const { return 0.0; }

  virtual const QuadraticForm* quadratic() const { return nullptr; }
  // value = sum_i h(x_i) + 0.5 * quad_weight * ||x||^2 when separable() != null
  virtual const ScalarConvex* separable() const { return nullptr; }
  virtual double separable_quad_weight() const { return 0.0; }

  // t -> value(base + t * dir), cheap per call. The default materializes the
  // point; quadratic implementations reduce to a degree-2 polynomial.
  virtual std::function<double(double)> ray_value(const Vector& base,
                                                  const Vector& dir) const {
    return [this, base, dir](double t) { return value(base + t * dir); };
  }
};

class SeparableConvex final : public ConvexFn {
 public:
  SeparableConvex(Index dim, std::shared_ptr<const ScalarConvex> h,
                  double quad_weight = 0.0)
      : dim_(dim), h_(std::move(h)), quad_weight_(quad_weight) {}

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  Vector witness_subgradient(const Vector& anchor,
                             const Vector& query) const override;
  bool smooth() const override { return h_->smooth(); }
  double grad_lipschitz() const override {
    return h_->grad_lipschitz() + quad_weight_;
  }
  const ScalarConvex* separable() const override { return h_.get(); }
  double separable_quad_weight() const override { return quad_weight_; }

 private:
  Index dim_;
  std::shared_ptr<const ScalarConvex> h_;
  double quad_weight_;
};

class QuadraticConvex final : public ConvexFn {
 public:
  QuadraticConvex(QuadraticForm form, double grad_lipschitz)
      : form_(std::move(form)), lip_(grad_lipschitz) {}
  Index dim() const override { return form_.hessian->dim(); }
  double value(const Vector& x) const override { return form_.value(x); }
  Vector subgradient(const Vector& x) const override { return form_.gradient(x); }
  bool smooth() const override { return true; }
  double grad_lipschitz() const override { return lip_; }
  const QuadraticForm* quadratic() const override { return &form_; }
  std::function<double(double)> ray_value(const Vector& base,
                                          const Vector& dir) const override {
    double v0 = form_.value(base);
    double v1 = form_.gradient(base).dot(dir);
    double v2 = 0.5 * dir.dot(form_.hessian->apply(dir));
    return [v0, v1, v2](double t) { return v0 + t * (v1 + t * v2); };
  }

 private:
  QuadraticForm form_;
  double lip_;
};

// Smooth part f with Lipschitz gradient.
class SmoothFn {
 public:
  virtual ~SmoothFn() = default;
  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual double grad_lipschitz() const = 0;
  virtual const QuadraticForm* quadratic() const { return nullptr; }
  virtual std::function<double(double)> ray_value(const Vector& base,
                                                  const Vector& dir) const {
    return [this, base, dir](double t) { return value(base + t * dir); };
  }
};

class ZeroSmooth final : public SmoothFn {
 public:
  explicit ZeroSmooth(Index dim) : dim_(dim) {
    form_.hessian = std::make_shared<ScaledIdentityOperator>(0.0, dim);
    form_.linear = Vector::Zero(dim);
  }
  Index dim() const override { return dim_; }
  double value(const Vector&) const override { return 0.0; }
  Vector gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  double grad_lipschitz() const override { return 0.0; }
  const QuadraticForm* quadratic() const override { return &form_; }
  std::function<double(double)> ray_value(const Vector&,
                                          const Vector&) const override {
    return [](double) { return 0.0; };
  }

 private:
  Index dim_;
  QuadraticForm form_;
};

class QuadraticSmooth final : public SmoothFn {
 public:
  QuadraticSmooth(QuadraticForm form, double grad_lipschitz)
      : form_(std::move(form)), lip_(grad_lipschitz) {}
  Index dim() const override { return form_.hessian->dim(); }
  double value(const Vector& x) const override { return form_.value(x); }
  Vector gradient(const Vector& x) const override { return form_.gradient(x); }
  double grad_lipschitz() const override { return lip_; }
  const QuadraticForm* quadratic() const override { return &form_; }
  std::function<double(double)> ray_value(const Vector& base,
                                          const Vector& dir) const override {
    double v0 = form_.value(base);
    double v1 = form_.gradient(base).dot(dir);
    double v2 = 0.5 * dir.dot(form_.hessian->apply(dir));
    return [v0, v1, v2](double t) { return v0 + t * (v1 + t * v2); };
  }

 private:
  QuadraticForm form_;
  double lip_;
};

// 0.5 ||Ax - b||^2 kept in factored form; the Gram matrix is applied as
// A^T (A x).
class LeastSquaresSmooth final : public SmoothFn {
 public:
  LeastSquaresSmooth(std::shared_ptr<const Matrix> a, Vector b,
                     double lambda_ata);
  Index dim() const override { return a_->cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double grad_lipschitz() const override { return lambda_ata_; }
  const QuadraticForm* quadratic() const override { return &form_; }
  std::function<double(double)> ray_value(const Vector& base,
                                          const Vector& dir) const override;

 private:
  std::shared_ptr<const Matrix> a_;
  Vector b_;
  double lambda_ata_;
  QuadraticForm form_;
};

// The objective E = f + g1 - g2 and its oracles. Immutable after
// construction; all oracles are pure, so one instance may be shared across
// concurrent solver runs.
struct DcProblem {
  std::shared_ptr<const SmoothFn> f;
  std::shared_ptr<const ConvexFn> g1;
  std::shared_ptr<const ConvexFn> g2;
  double g1_strong_convexity = 0.0;  // mu >= 0
  double g1_upper_modulus = 0.0;     // sigma > 0 when g1 is nonsmooth
  std::string descriptor;

  Index dim() const { return f->dim(); }
  bool smooth_energy() const { return g1->smooth() && g2->smooth(); }
  void check_dim(const Vector& x) const {
    if (x.size() != dim())
      throw std::invalid_argument("vector length " + std::to_string(x.size()) +
                                  " does not match problem dimension " +
                                  std::to_string(dim()));
  }
  // Single evaluation path for E; +inf propagates from g1.
  double energy(const Vector& x) const {
    return f->value(x) + g1->value(x) - g2->value(x);
  }

  // t -> E(base + t * dir), assembled from the three ray evaluators.
  std::function<double(double)> energy_ray(const Vector& base,
                                           const Vector& dir) const {
    auto fr = f->ray_value(base, dir);
    auto g1r = g1->ray_value(base, dir);
    auto g2r = g2->ray_value(base, dir);
    return [fr = std::move(fr), g1r = std::move(g1r),
            g2r = std::move(g2r)](double t) { return fr(t) + g1r(t) - g2r(t); };
  }
};

double evaluate_energy(const DcProblem& p, const Vector& x);
Vector subgradient_g2(const DcProblem& p, const Vector& x);

}  // namespace dcopt
