#include "dcopt/subproblem.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace dcopt {

namespace {

// Diagonal entries when the operator IS a diagonal matrix, not merely one
// that can report its diagonal.
std::optional<Vector> as_diagonal_matrix(const SymOperator& s) {
  if (const auto* d = dynamic_cast<const DiagonalOperator*>(&s))
    return d->diagonal();
  if (const auto* i = dynamic_cast<const ScaledIdentityOperator*>(&s))
    return Vector::Constant(i->dim(), i->scale());
  return std::nullopt;
}

Vector jacobi_sweeps(const SymOperator& a, const Vector& diag, const Vector& b,
                     const Vector& y, int sweeps, InnerSolveStats* stats) {
  Vector x = y;
  Vector r(b.size());
  for (int s = 0; s < sweeps; ++s) {
    a.apply(x, r);
    r = b - r;
    x += r.cwiseQuotient(diag);
  }
  if (stats) {
    stats->inner_iterations = sweeps;
    a.apply(x, r);
    stats->final_residual = (b - r).norm();
  }
  return x;
}

Vector cg_solve(const SymOperator& a, const Vector& b, const Vector& y,
                double tol, int max_inner, InnerSolveStats* stats) {
  Vector x = y;
  Vector r = b - a.apply(x);
  Vector p = r;
  double rs = r.squaredNorm();
  int it = 0;
  bool exhausted = true;
  Vector ap(b.size());
  for (; it < max_inner; ++it) {
    if (rs == 0.0) { exhausted = false; break; }
    a.apply(p, ap);
    double denom = p.dot(ap);
    if (denom <= 0.0) { exhausted = false; break; }
    double alpha = rs / denom;
    x += alpha * p;
    r -= alpha * ap;
    // stopping rule on successive iterates: ||x^{l+1} - x^l|| = alpha ||p||
    if (alpha * p.norm() < tol) { ++it; exhausted = false; break; }
    double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  if (stats) {
    stats->inner_iterations = it;
    stats->final_residual = (b - a.apply(x)).norm();
    stats->budget_exhausted = exhausted;
  }
  return x;
}

}  // namespace

Vector preconditioned_step(const SymOperator& a, const Vector& b,
                           const Vector& y, const Preconditioner& p,
                           InnerSolveStats* stats) {
  if (b.size() != a.dim() || y.size() != a.dim())
    throw std::invalid_argument("preconditioned step dimension mismatch");
  switch (p.kind) {
    case PrecondKind::None: {
      Eigen::LDLT<Matrix> ldlt(a.to_dense());
      return ldlt.solve(b);
    }
    case PrecondKind::Exact: {
      if (!p.matrix || p.matrix->dim() != a.dim())
        throw std::invalid_argument("exact preconditioner needs a matching M");
      Matrix big = a.to_dense() + p.matrix->to_dense();
      Eigen::LDLT<Matrix> ldlt(big);
      return y + ldlt.solve(b - a.apply(y));
    }
    case PrecondKind::SpectralGap: {
      double gap = p.gap_scale;
      if (gap <= 0.0) gap = 1.01 * estimate_largest_eigenvalue(a);
      return y + (b - a.apply(y)) / gap;
    }
    case PrecondKind::Jacobi: {
      if (!a.has_diagonal())
        throw std::invalid_argument("jacobi sweeps need a diagonal");
      return jacobi_sweeps(a, a.diagonal(), b, y, p.sweeps, stats);
    }
    case PrecondKind::Cg:
      return cg_solve(a, b, y, p.cg_tol, p.cg_max_inner, stats);
  }
  throw std::logic_error("unreachable");
}

struct SubproblemEngine::Impl {
  enum class Path { Quad, Prox } path = Path::Quad;
  Preconditioner precond;
  double scale = 1.0;  // L in linearized form

  // Quad path: solve (A + M) x = M y + b with A x = b0 (+ gradient terms)
  std::shared_ptr<const SymOperator> a_op;
  Vector b0;
  Vector a_diag;                       // Jacobi
  std::optional<Eigen::LDLT<Matrix>> factor;  // Exact/None
  const SmoothFn* f = nullptr;         // Linearized: b = b0 - grad f(y) + xi

  // Prox path: coordinatewise prox with diagonal D
  const ScalarConvex* h = nullptr;
  double quad_weight = 0.0;
  Vector d_diag;
  std::optional<Vector> m_diag;        // explicit diagonal M (prox path)
  const QuadraticForm* f_quad = nullptr;

  // metric bookkeeping
  bool metric_explicit = false;
  double mu_min = 0.0;
  double gap_scale = 0.0;
  std::shared_ptr<const SymOperator> gap_base;  // M = gap_scale I - gap_base
  std::shared_ptr<const SymOperator> m_explicit;
  double metric_factor = 1.0;  // linearized quad path folds L into M
};

namespace {

// A + B as a concrete sparse matrix when both terms have assemblable
// structure; falls back to a lazy sum otherwise.
std::shared_ptr<const SymOperator> combine(
    const std::shared_ptr<const SymOperator>& a,
    const std::shared_ptr<const SymOperator>& b) {
  auto sparse_of = [](const SymOperator& s) -> std::optional<SparseMatrix> {
    if (const auto* sp = dynamic_cast<const SparseOperator*>(&s))
      return sp->matrix();
    if (auto d = as_diagonal_matrix(s)) {
      SparseMatrix m(s.dim(), s.dim());
      m.reserve(Eigen::VectorXi::Constant(static_cast<int>(s.dim()), 1));
      for (Index i = 0; i < s.dim(); ++i) m.insert(i, i) = (*d)[i];
      m.makeCompressed();
      return m;
    }
    return std::nullopt;
  };
  auto sa = sparse_of(*a);
  auto sb = sparse_of(*b);
  if (sa && sb) return std::make_shared<SparseOperator>(SparseMatrix(*sa + *sb));
  return std::make_shared<SumOperator>(
      std::vector<std::shared_ptr<const SymOperator>>{a, b});
}

double diagonal_mu_min(const SymOperator& m) {
  if (auto d = as_diagonal_matrix(m)) return d->minCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.to_dense());
  return es.eigenvalues().minCoeff();
}

}  // namespace

SubproblemEngine::SubproblemEngine(const DcProblem& prob, SubproblemForm form,
                                   Preconditioner precond)
    : form_(form), impl_(std::make_unique<Impl>()) {
  impl_->precond = precond;
  const QuadraticForm* fq = prob.f->quadratic();
  const QuadraticForm* g1q = prob.g1->quadratic();
  const ScalarConvex* g1h = prob.g1->separable();

  auto setup_quad = [&](std::shared_ptr<const SymOperator> a_op, Vector b0,
                        double metric_factor) {
    impl_->path = Impl::Path::Quad;
    impl_->a_op = std::move(a_op);
    impl_->b0 = std::move(b0);
    impl_->metric_factor = metric_factor;
    switch (precond.kind) {
      case PrecondKind::None:
        impl_->factor.emplace(impl_->a_op->to_dense());
        impl_->metric_explicit = true;
        impl_->mu_min = 0.0;
        break;
      case PrecondKind::Exact: {
        if (!precond.matrix || precond.matrix->dim() != impl_->a_op->dim())
          throw std::invalid_argument("exact preconditioner dimension mismatch");
        Matrix big = impl_->a_op->to_dense() +
                     metric_factor * precond.matrix->to_dense();
        impl_->factor.emplace(big);
        impl_->m_explicit = precond.matrix;
        impl_->metric_explicit = true;
        impl_->mu_min = diagonal_mu_min(*precond.matrix);
        break;
      }
      case PrecondKind::SpectralGap: {
        double est = estimate_largest_eigenvalue(*impl_->a_op);
        impl_->gap_scale = precond.gap_scale > 0.0 ? precond.gap_scale : 1.01 * est;
        impl_->gap_base = impl_->a_op;
        impl_->metric_explicit = true;
        impl_->mu_min = (impl_->gap_scale - est) / metric_factor;
        break;
      }
      case PrecondKind::Jacobi:
        if (!impl_->a_op->has_diagonal())
          throw std::invalid_argument("jacobi preconditioning needs a diagonal");
        impl_->a_diag = impl_->a_op->diagonal();
        if ((impl_->a_diag.array() <= 0.0).any())
          throw std::invalid_argument("jacobi sweeps need a positive diagonal");
        if (!strictly_diagonally_dominant(*impl_->a_op))
          warnings_.push_back(
              "subproblem operator is not strictly diagonally dominant; "
              "jacobi sweeps may not contract");
        break;
      case PrecondKind::Cg:
        break;
    }
  };

  if (form == SubproblemForm::Implicit) {
    impl_->scale = 1.0;
    if (fq && g1q) {
      // quadratic f + g1: grad (f+g1)(y) = A y - b0
      setup_quad(combine(fq->hessian, g1q->hessian), fq->linear + g1q->linear,
                 1.0);
      return;
    }
    if (fq && g1h && g1h->has_prox()) {
      impl_->path = Impl::Path::Prox;
      impl_->h = g1h;
      impl_->quad_weight = prob.g1->separable_quad_weight();
      impl_->f_quad = fq;
      Vector base;
      switch (precond.kind) {
        case PrecondKind::None:
          base = Vector::Zero(prob.dim());
          impl_->metric_explicit = true;
          impl_->mu_min = 0.0;
          break;
        case PrecondKind::Exact: {
          auto d = precond.matrix ? as_diagonal_matrix(*precond.matrix)
                                  : std::nullopt;
          if (!d)
            throw std::invalid_argument(
                "separable g1 needs a diagonal preconditioner");
          impl_->m_diag = *d;
          base = *d;
          impl_->m_explicit = precond.matrix;
          impl_->metric_explicit = true;
          impl_->mu_min = d->minCoeff();
          break;
        }
        case PrecondKind::SpectralGap: {
          double est = estimate_largest_eigenvalue(*fq->hessian);
          impl_->gap_scale = precond.gap_scale > 0.0 ? precond.gap_scale : 1.01 * est;
          impl_->gap_base = fq->hessian;
          impl_->metric_explicit = true;
          impl_->mu_min = impl_->gap_scale - est;
          base = Vector::Constant(prob.dim(), impl_->gap_scale);
          // M + hess f collapses to gap_scale * I
          impl_->d_diag = base.array() + impl_->quad_weight;
          return;
        }
        default:
          throw std::invalid_argument(
              "jacobi/cg preconditioning needs a quadratic subproblem");
      }
      auto fd = as_diagonal_matrix(*fq->hessian);
      if (!fd)
        throw std::invalid_argument(
            "separable g1 needs a diagonal M + hess f; choose the spectral-gap "
            "preconditioner");
      impl_->d_diag = base + *fd + Vector::Constant(prob.dim(), impl_->quad_weight);
      if ((impl_->d_diag.array() <= 0.0).any())
        throw std::invalid_argument("subproblem metric is not positive definite");
      return;
    }
    throw std::invalid_argument(
        "implicit subproblem needs quadratic f+g1 or prox-able g1 with "
        "quadratic f");
  }

  // Linearized form
  impl_->scale = prob.f->grad_lipschitz();
  impl_->f = prob.f.get();
  if (g1q) {
    double mf = impl_->scale > 0.0 ? impl_->scale : 1.0;
    setup_quad(g1q->hessian, g1q->linear, mf);
    return;
  }
  if (g1h && g1h->has_prox()) {
    impl_->path = Impl::Path::Prox;
    impl_->h = g1h;
    impl_->quad_weight = prob.g1->separable_quad_weight();
    double L = impl_->scale > 0.0 ? impl_->scale : 1.0;
    Vector m;
    switch (precond.kind) {
      case PrecondKind::None:
        m = Vector::Zero(prob.dim());
        impl_->metric_explicit = true;
        impl_->mu_min = 0.0;
        break;
      case PrecondKind::Exact: {
        auto d = precond.matrix ? as_diagonal_matrix(*precond.matrix)
                                : std::nullopt;
        if (!d)
          throw std::invalid_argument(
              "separable g1 needs a diagonal preconditioner");
        impl_->m_diag = *d;
        m = *d;
        impl_->m_explicit = precond.matrix;
        impl_->metric_explicit = true;
        impl_->mu_min = d->minCoeff();
        break;
      }
      default:
        throw std::invalid_argument(
            "linearized subproblem with separable g1 needs an explicit "
            "diagonal metric");
    }
    impl_->d_diag = L * m + Vector::Constant(prob.dim(), impl_->quad_weight);
    impl_->m_diag = m;
    if ((impl_->d_diag.array() <= 0.0).any())
      throw std::invalid_argument("subproblem metric is not positive definite");
    return;
  }
  throw std::invalid_argument(
      "linearized subproblem needs quadratic or prox-able g1");
}

SubproblemEngine::~SubproblemEngine() = default;
SubproblemEngine::SubproblemEngine(SubproblemEngine&&) noexcept = default;

Vector SubproblemEngine::solve(const Vector& y, const Vector& xi,
                               InnerSolveStats* stats) const {
  const Impl& im = *impl_;
  if (im.path == Impl::Path::Quad) {
    Vector b;
    if (form_ == SubproblemForm::Implicit)
      b = im.b0 + xi;
    else
      b = im.b0 - im.f->gradient(y) + xi;
    switch (im.precond.kind) {
      case PrecondKind::None:
        return im.factor->solve(b);
      case PrecondKind::Exact:
        return y + im.factor->solve(b - im.a_op->apply(y));
      case PrecondKind::SpectralGap:
        return y + (b - im.a_op->apply(y)) / im.gap_scale;
      case PrecondKind::Jacobi:
        return jacobi_sweeps(*im.a_op, im.a_diag, b, y, im.precond.sweeps, stats);
      case PrecondKind::Cg:
        return cg_solve(*im.a_op, b, y, im.precond.cg_tol,
                        im.precond.cg_max_inner, stats);
    }
    throw std::logic_error("unreachable");
  }

  // Prox path: coordinatewise argmin of (D_i/2) u^2 - r_i u + h(u)
  Vector r;
  if (form_ == SubproblemForm::Implicit) {
    if (im.gap_base) {
      r = im.gap_scale * y - im.f_quad->gradient(y) + xi;
    } else {
      r = xi + im.f_quad->linear;
      if (im.m_diag) r += im.m_diag->cwiseProduct(y);
    }
  } else {
    double L = im.scale > 0.0 ? im.scale : 1.0;
    r = -(im.f->gradient(y) - xi);
    if (im.m_diag && im.m_diag->size() > 0)
      r += L * im.m_diag->cwiseProduct(y);
  }
  Vector x(y.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double d = im.d_diag[i];
    x[i] = im.h->prox(r[i] / d, 1.0 / d);
  }
  return x;
}

double SubproblemEngine::lyapunov_scale() const {
  return form_ == SubproblemForm::Implicit
             ? 1.0
             : (impl_->scale > 0.0 ? impl_->scale : 1.0);
}

bool SubproblemEngine::metric_known() const { return impl_->metric_explicit; }

double SubproblemEngine::metric_norm_sq(const Vector& v) const {
  const Impl& im = *impl_;
  if (!im.metric_explicit) return 0.0;
  if (im.gap_base)
    return (im.gap_scale * v.squaredNorm() - v.dot(im.gap_base->apply(v))) /
           im.metric_factor;
  if (im.m_explicit) return v.dot(im.m_explicit->apply(v));
  if (im.m_diag && im.m_diag->size() > 0)
    return v.dot(im.m_diag->cwiseProduct(v));
  return 0.0;  // M = 0
}

double SubproblemEngine::mu_min() const { return impl_->mu_min; }

Vector solve_implicit_subproblem(const DcProblem& prob, const Vector& y,
                                 const Vector& xi, const Preconditioner& p,
                                 InnerSolveStats* stats) {
  SubproblemEngine eng(prob, SubproblemForm::Implicit, p);
  return eng.solve(y, xi, stats);
}

Vector solve_linearized_subproblem(const DcProblem& prob, const Vector& y,
                                   const Vector& xi, const Preconditioner& p,
                                   InnerSolveStats* stats) {
  SubproblemEngine eng(prob, SubproblemForm::Linearized, p);
  return eng.solve(y, xi, stats);
}

}  // namespace dcopt
