#include "dcopt/operators.hpp"

#include <cmath>

#include "dcopt/rng.hpp"

namespace dcopt {

Matrix SymOperator::to_dense() const {
  Matrix m(dim(), dim());
  Vector e = Vector::Zero(dim());
  Vector col(dim());
  for (Index j = 0; j < dim(); ++j) {
    e[j] = 1.0;
    apply(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

DenseOperator::DenseOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("dense operator must be square");
}

void DenseOperator::apply(const Vector& v, Vector& out) const { out.noalias() = m_ * v; }

SparseOperator::SparseOperator(SparseMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("sparse operator must be square");
  m_.makeCompressed();
}

void SparseOperator::apply(const Vector& v, Vector& out) const { out.noalias() = m_ * v; }

void DiagonalOperator::apply(const Vector& v, Vector& out) const {
  out = d_.cwiseProduct(v);
}

GramOperator::GramOperator(std::shared_ptr<const Matrix> a) : a_(std::move(a)) {
  if (!a_ || a_->size() == 0) throw std::invalid_argument("empty design matrix");
}

void GramOperator::apply(const Vector& v, Vector& out) const {
  Vector av = (*a_) * v;
  out.noalias() = a_->transpose() * av;
}

SumOperator::SumOperator(std::vector<std::shared_ptr<const SymOperator>> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("empty operator sum");
  for (const auto& t : terms_)
    if (t->dim() != terms_.front()->dim())
      throw std::invalid_argument("operator sum dimension mismatch");
}

void SumOperator::apply(const Vector& v, Vector& out) const {
  Vector tmp(dim());
  terms_.front()->apply(v, out);
  for (std::size_t i = 1; i < terms_.size(); ++i) {
    terms_[i]->apply(v, tmp);
    out += tmp;
  }
}

bool SumOperator::has_diagonal() const {
  for (const auto& t : terms_)
    if (!t->has_diagonal()) return false;
  return true;
}

Vector SumOperator::diagonal() const {
  Vector d = terms_.front()->diagonal();
  for (std::size_t i = 1; i < terms_.size(); ++i) d += terms_[i]->diagonal();
  return d;
}

double estimate_largest_eigenvalue(const SymOperator& s, int max_iters,
                                   double rel_tol, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(s.dim());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  double nrm = v.norm();
  if (nrm == 0.0) v[0] = 1.0; else v /= nrm;

  double lambda = 0.0;
  Vector sv(s.dim());
  for (int it = 0; it < max_iters; ++it) {
    s.apply(v, sv);
    double next = v.dot(sv);
    double snorm = sv.norm();
    if (snorm == 0.0) return 0.0;
    v = sv / snorm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double symmetry_defect(const SymOperator& s, int probes, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  Vector u(s.dim()), v(s.dim());
  for (int p = 0; p < probes; ++p) {
    for (Index i = 0; i < s.dim(); ++i) u[i] = rng.normal();
    for (Index i = 0; i < s.dim(); ++i) v[i] = rng.normal();
    double a = v.dot(s.apply(u));
    double b = u.dot(s.apply(v));
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

bool strictly_diagonally_dominant(const SymOperator& s) {
  if (const auto* sp = dynamic_cast<const SparseOperator*>(&s)) {
    const SparseMatrix& m = sp->matrix();
    Vector off = Vector::Zero(m.rows());
    Vector diag = Vector::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        if (it.row() == it.col())
          diag[it.row()] = std::abs(it.value());
        else
          off[it.row()] += std::abs(it.value());
      }
    return (diag.array() > off.array()).all();
  }
  Matrix m = s.to_dense();
  for (Index i = 0; i < m.rows(); ++i) {
    double off = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
    if (std::abs(m(i, i)) <= off) return false;
  }
  return true;
}

}  // namespace dcopt
