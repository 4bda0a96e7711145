#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcopt/problem.hpp"

namespace dcopt {

// How the proximal weight M is realized. Exact/SpectralGap/None fix M
// explicitly; Jacobi and Cg leave it implicit in a budgeted inner iteration
// on the unweighted system, warm-started from the extrapolated anchor.
enum class PrecondKind { None, Exact, SpectralGap, Jacobi, Cg };

struct Preconditioner {
  PrecondKind kind = PrecondKind::None;
  std::shared_ptr<const SymOperator> matrix;  // Exact
  double gap_scale = 0.0;  // SpectralGap; <= 0 requests auto-estimation
  int sweeps = 5;          // Jacobi
  double cg_tol = 1e-11;   // successive-iterate tolerance
  int cg_max_inner = 20000;

  static Preconditioner none() { return {}; }
  static Preconditioner exact(std::shared_ptr<const SymOperator> m) {
    Preconditioner p;
    p.kind = PrecondKind::Exact;
    p.matrix = std::move(m);
    return p;
  }
  static Preconditioner identity(double scale, Index dim) {
    return exact(std::make_shared<ScaledIdentityOperator>(scale, dim));
  }
  static Preconditioner spectral_gap(double scale = 0.0) {
    Preconditioner p;
    p.kind = PrecondKind::SpectralGap;
    p.gap_scale = scale;
    return p;
  }
  static Preconditioner jacobi(int sweeps = 5) {
    Preconditioner p;
    p.kind = PrecondKind::Jacobi;
    p.sweeps = sweeps;
    return p;
  }
  static Preconditioner cg(double tol = 1e-11, int max_inner = 20000) {
    Preconditioner p;
    p.kind = PrecondKind::Cg;
    p.cg_tol = tol;
    p.cg_max_inner = max_inner;
    return p;
  }
};

struct InnerSolveStats {
  int inner_iterations = 0;
  double final_residual = 0.0;
  bool budget_exhausted = false;  // CG stopped by max_inner, not tolerance
};

// One preconditioned iteration x = y + (A + M)^{-1} (b - A y) for the system
// A x = b with initial value y. For Jacobi/Cg kinds the weight is implicit:
// the stated number of sweeps (or CG to tolerance) runs on A x = b from y.
Vector preconditioned_step(const SymOperator& a, const Vector& b,
                           const Vector& y, const Preconditioner& p,
                           InnerSolveStats* stats = nullptr);

enum class SubproblemForm { Implicit, Linearized };

// Resolves and caches the per-iteration subproblem solve for a problem,
// split form and preconditioner choice. Construction fails fast on
// unsupported combinations (configuration errors).
class SubproblemEngine {
 public:
  SubproblemEngine(const DcProblem& prob, SubproblemForm form,
                   Preconditioner precond);
  ~SubproblemEngine();
  SubproblemEngine(SubproblemEngine&&) noexcept;

  // xbar from anchor y and subgradient xi of g2 at x^n.
  Vector solve(const Vector& y, const Vector& xi,
               InnerSolveStats* stats = nullptr) const;

  SubproblemForm form() const { return form_; }
  // 1 for the implicit form, L for the linearized form
  double lyapunov_scale() const;
  // Whether M is explicit, and the M-metric for diagnostics when it is.
  bool metric_known() const;
  double metric_norm_sq(const Vector& v) const;
  double mu_min() const;
  const std::vector<std::string>& setup_warnings() const { return warnings_; }

 private:
  struct Impl;
  SubproblemForm form_;
  std::unique_ptr<Impl> impl_;
  std::vector<std::string> warnings_;
};

// One-shot forms of the two subproblem solves.
Vector solve_implicit_subproblem(const DcProblem& prob, const Vector& y,
                                 const Vector& xi, const Preconditioner& p,
                                 InnerSolveStats* stats = nullptr);
Vector solve_linearized_subproblem(const DcProblem& prob, const Vector& y,
                                   const Vector& xi, const Preconditioner& p,
                                   InnerSolveStats* stats = nullptr);

}  // namespace dcopt
