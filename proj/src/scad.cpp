#include "dcopt/scad.hpp"

#include <cmath>
#include <stdexcept>

#include "dcopt/rng.hpp"

namespace dcopt {

void ScadParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(theta > 1.0)) throw std::invalid_argument("theta must be > 1");
  if (!(knee() < mu)) throw std::invalid_argument("alpha must be < mu");
}

double tilde_s(double x, const ScadParams& p) {
  const double ax = std::abs(x);
  if (ax <= p.mu) return 0.0;
  if (ax < p.theta * p.mu) {
    const double t = ax - p.mu;
    return t * t / (2.0 * (p.theta - 1.0));
  }
  return p.mu * ax - p.mu * p.mu * (p.theta + 1.0) * 0.5;
}

double tilde_s_grad(double x, const ScadParams& p) {
  const double ax = std::abs(x);
  const double num = std::max(std::min(p.theta * p.mu, ax) - p.mu, 0.0);
  const double g = num / (p.theta - 1.0);
  return x > 0 ? g : (x < 0 ? -g : 0.0);
}

double scad_value(const Vector& x, const ScadParams& p) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    s += p.mu * std::abs(x[i]) - tilde_s(x[i], p);
  return s;
}

double huber(double x, double alpha) {
  const double ax = std::abs(x);
  if (ax <= alpha) return 0.5 * x * x / alpha;
  return ax - 0.5 * alpha;
}

double huber_grad(double x, double alpha) {
  if (std::abs(x) <= alpha) return x / alpha;
  return x > 0 ? 1.0 : -1.0;
}

double huber_scad(double x, const ScadParams& p) {
  return p.mu * huber(x, p.knee()) - tilde_s(x, p);
}

double huber_scad_grad(double x, const ScadParams& p) {
  return p.mu * huber_grad(x, p.knee()) - tilde_s_grad(x, p);
}

HuberScalar::HuberScalar(double weight, double alpha) : w_(weight), alpha_(alpha) {
  if (!(weight >= 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("huber penalty needs weight >= 0 and alpha > 0");
}

double HuberScalar::value(double x) const { return w_ * huber(x, alpha_); }

double HuberScalar::subgrad(double x) const { return w_ * huber_grad(x, alpha_); }

double HuberScalar::prox(double z, double t) const {
  const double s = t * w_;
  if (std::abs(z) <= alpha_ + s) return z * alpha_ / (alpha_ + s);
  return z > 0 ? z - s : z + s;
}

// sum_i tilde_s(x_i), the smooth convex part subtracted by the standard split
class TildeSScalar final : public ScalarConvex {
 public:
  explicit TildeSScalar(ScadParams p) : p_(p) {}
  double value(double x) const override { return tilde_s(x, p_); }
  double subgrad(double x) const override { return tilde_s_grad(x, p_); }
  bool smooth() const override { return true; }
  double grad_lipschitz() const override { return 1.0 / (p_.theta - 1.0); }

 private:
  ScadParams p_;
};

// g2 of the alternative split: (lam/2)||x||^2 + sum tilde_s - 0.5||Ax-b||^2.
// Convex because lam dominates the largest eigenvalue of A^T A.
class ShiftedComplement final : public ConvexFn {
 public:
  ShiftedComplement(std::shared_ptr<const LeastSquaresData> data, ScadParams p)
      : data_(std::move(data)), p_(p) {}

  Index dim() const override { return data_->features(); }

  double value(const Vector& x) const override {
    double s = 0.5 * data_->lambda_ata * x.squaredNorm();
    for (Index i = 0; i < x.size(); ++i) s += tilde_s(x[i], p_);
    Vector r = (*data_->a) * x - data_->b;
    return s - 0.5 * r.squaredNorm();
  }

  Vector subgradient(const Vector& x) const override {
    Vector g = data_->lambda_ata * x;
    for (Index i = 0; i < x.size(); ++i) g[i] += tilde_s_grad(x[i], p_);
    Vector r = (*data_->a) * x - data_->b;
    g -= data_->a->transpose() * r;
    return g;
  }

  bool smooth() const override { return true; }
  double grad_lipschitz() const override {
    return 2.0 * data_->lambda_ata + 1.0 / (p_.theta - 1.0);
  }

  std::function<double(double)> ray_value(const Vector& base,
                                          const Vector& dir) const override {
    Vector r0 = (*data_->a) * base - data_->b;
    Vector ad = (*data_->a) * dir;
    const double q0 = 0.5 * r0.squaredNorm();
    const double q1 = r0.dot(ad);
    const double q2 = 0.5 * ad.squaredNorm();
    const double lam = data_->lambda_ata;
    return [this, base, dir, q0, q1, q2, lam](double t) {
      Vector x = base + t * dir;
      double s = 0.5 * lam * x.squaredNorm();
      for (Index i = 0; i < x.size(); ++i) s += tilde_s(x[i], p_);
      return s - (q0 + t * (q1 + t * q2));
    };
  }

 private:
  std::shared_ptr<const LeastSquaresData> data_;
  ScadParams p_;
};

LeastSquaresData make_least_squares(Matrix a, Vector b) {
  if (a.rows() != b.size())
    throw std::invalid_argument("design/observation dimension mismatch");
  LeastSquaresData d;
  d.a = std::make_shared<Matrix>(std::move(a));
  d.b = std::move(b);
  GramOperator gram(d.a);
  d.lambda_ata = 1.01 * estimate_largest_eigenvalue(gram);
  return d;
}

LeastSquaresData synthetic_instance(const SyntheticSpec& spec,
                                    std::uint64_t seed, Vector* ground_truth) {
  if (spec.m <= 0 || spec.k <= 0 || spec.sparsity < 0 || spec.sparsity > spec.k)
    throw std::invalid_argument("bad synthetic instance shape");
  Rng rng(seed);
  Matrix a(spec.m, spec.k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = scale * rng.normal();

  Vector x_true = Vector::Zero(spec.k);
  for (int placed = 0; placed < spec.sparsity;) {
    Index j = static_cast<Index>(rng.below(spec.k));
    if (x_true[j] != 0.0) continue;
    x_true[j] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    ++placed;
  }

  Vector b = a * x_true;
  for (Index i = 0; i < b.size(); ++i) b[i] += spec.noise_std * rng.normal();

  if (ground_truth) *ground_truth = x_true;
  return make_least_squares(std::move(a), std::move(b));
}

DcProblem build_scad_problem(std::shared_ptr<const LeastSquaresData> data,
                             const ScadParams& p, ScadVariant variant,
                             ScadSplit split) {
  p.validate();
  const Index k = data->features();

  std::shared_ptr<const ScalarConvex> penalty;
  if (variant == ScadVariant::L1)
    penalty = std::make_shared<AbsScalar>(p.mu);
  else
    penalty = std::make_shared<HuberScalar>(p.mu, p.knee());

  DcProblem prob;
  if (split == ScadSplit::Standard) {
    prob.f = std::make_shared<LeastSquaresSmooth>(data->a, data->b, data->lambda_ata);
    prob.g1 = std::make_shared<SeparableConvex>(k, penalty);
    prob.g2 = std::make_shared<SeparableConvex>(k, std::make_shared<TildeSScalar>(p));
  } else {
    prob.f = std::make_shared<ZeroSmooth>(k);
    prob.g1 = std::make_shared<SeparableConvex>(k, penalty, data->lambda_ata);
    prob.g2 = std::make_shared<ShiftedComplement>(data, p);
  }
  prob.g1_strong_convexity = split == ScadSplit::Bdca ? data->lambda_ata : 0.0;
  prob.g1_upper_modulus = variant == ScadVariant::L1 ? 1e-2 : 0.0;
  prob.descriptor = std::string("scad_ls/") +
                    (variant == ScadVariant::L1 ? "l1" : "huber") + "/" +
                    (split == ScadSplit::Standard ? "standard" : "bdca");
  return prob;
}

}  // namespace dcopt
