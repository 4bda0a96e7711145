#include "dcopt/problem.hpp"

#include <cmath>

namespace dcopt {

double SeparableConvex::value(const Vector& x) const {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += h_->value(x[i]);
  if (quad_weight_ != 0.0) s += 0.5 * quad_weight_ * x.squaredNorm();
  return s;
}

Vector SeparableConvex::subgradient(const Vector& x) const {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) g[i] = h_->subgrad(x[i]);
  if (quad_weight_ != 0.0) g += quad_weight_ * x;
  return g;
}

Vector SeparableConvex::witness_subgradient(const Vector& anchor,
                                            const Vector& query) const {
  Vector g(anchor.size());
  for (Index i = 0; i < anchor.size(); ++i) g[i] = h_->witness(anchor[i], query[i]);
  if (quad_weight_ != 0.0) g += quad_weight_ * anchor;
  return g;
}

LeastSquaresSmooth::LeastSquaresSmooth(std::shared_ptr<const Matrix> a,
                                       Vector b, double lambda_ata)
    : a_(std::move(a)), b_(std::move(b)), lambda_ata_(lambda_ata) {
  if (a_->rows() != b_.size())
    throw std::invalid_argument("design/observation dimension mismatch");
  form_.hessian = std::make_shared<GramOperator>(a_);
  form_.linear = a_->transpose() * b_;
  form_.constant = 0.5 * b_.squaredNorm();
}

double LeastSquaresSmooth::value(const Vector& x) const {
  Vector r = (*a_) * x - b_;
  return 0.5 * r.squaredNorm();
}

Vector LeastSquaresSmooth::gradient(const Vector& x) const {
  Vector r = (*a_) * x - b_;
  return a_->transpose() * r;
}

std::function<double(double)> LeastSquaresSmooth::ray_value(
    const Vector& base, const Vector& dir) const {
  Vector r0 = (*a_) * base - b_;
  Vector ad = (*a_) * dir;
  const double v0 = 0.5 * r0.squaredNorm();
  const double v1 = r0.dot(ad);
  const double v2 = 0.5 * ad.squaredNorm();
  return [v0, v1, v2](double t) { return v0 + t * (v1 + t * v2); };
}

double evaluate_energy(const DcProblem& p, const Vector& x) {
  p.check_dim(x);
  if (!x.allFinite())
    throw std::invalid_argument("energy evaluation at a non-finite point");
  return p.energy(x);
}

Vector subgradient_g2(const DcProblem& p, const Vector& x) {
  p.check_dim(x);
  return p.g2->subgradient(x);
}

}  // namespace dcopt
