#include "dcopt/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dcopt/diagnostics.hpp"
#include "dcopt/graphgl.hpp"

namespace dcopt {

AlgorithmShape algorithm_shape(Algorithm a) {
  using P = ExtrapolationPolicy;
  switch (a) {
    case Algorithm::NpDcaeNls:
      return {SubproblemForm::Implicit, P::Lsde, LineSearchMode::NonMonotone};
    case Algorithm::PDcaeNls:
      return {SubproblemForm::Linearized, P::Lsde, LineSearchMode::NonMonotone};
    case Algorithm::Dca:
      return {SubproblemForm::Implicit, P::None, LineSearchMode::None};
    case Algorithm::BdcaLs:
      return {SubproblemForm::Implicit, P::None, LineSearchMode::Monotone};
    case Algorithm::PDca:
      return {SubproblemForm::Linearized, P::None, LineSearchMode::None};
    case Algorithm::PDcaNls:
      return {SubproblemForm::Linearized, P::None, LineSearchMode::NonMonotone};
    case Algorithm::PDcaeFixed:
      return {SubproblemForm::Linearized, P::FistaFixedRestart, LineSearchMode::None};
    case Algorithm::PDcaeAdaptive:
      return {SubproblemForm::Linearized, P::FistaAdaptiveRestart, LineSearchMode::None};
    case Algorithm::PDcaeNoRestart:
      return {SubproblemForm::Linearized, P::FistaNoRestart, LineSearchMode::None};
    case Algorithm::NpDcae:
      return {SubproblemForm::Implicit, P::FistaAdaptiveRestart, LineSearchMode::None};
  }
  throw std::logic_error("unknown algorithm");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::NpDcaeNls: return "npdcae_nls";
    case Algorithm::PDcaeNls: return "pdcae_nls";
    case Algorithm::Dca: return "dca";
    case Algorithm::BdcaLs: return "bdca_ls";
    case Algorithm::PDca: return "pdca";
    case Algorithm::PDcaNls: return "pdca_nls";
    case Algorithm::PDcaeFixed: return "pdcae_fixed";
    case Algorithm::PDcaeAdaptive: return "pdcae_adaptive";
    case Algorithm::PDcaeNoRestart: return "pdcae_norestart";
    case Algorithm::NpDcae: return "npdcae";
  }
  throw std::logic_error("unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  for (Algorithm a :
       {Algorithm::NpDcaeNls, Algorithm::PDcaeNls, Algorithm::Dca,
        Algorithm::BdcaLs, Algorithm::PDca, Algorithm::PDcaNls,
        Algorithm::PDcaeFixed, Algorithm::PDcaeAdaptive,
        Algorithm::PDcaeNoRestart, Algorithm::NpDcae})
    if (algorithm_name(a) == name) return a;
  throw std::invalid_argument("unknown algorithm: " + name);
}

Termination Termination::rel_change(double eps) {
  Termination t;
  t.kind = Kind::RelChange;
  t.epsilon = eps;
  return t;
}

Termination Termination::step_norm(double eps) {
  Termination t;
  t.kind = Kind::StepNorm;
  t.epsilon = eps;
  return t;
}

Termination Termination::grad_norm(double eps) {
  Termination t;
  t.kind = Kind::GradNorm;
  t.epsilon = eps;
  return t;
}

Termination Termination::dice_bound(
    std::shared_ptr<const std::vector<bool>> truth, double threshold) {
  Termination t;
  t.kind = Kind::DiceBound;
  t.truth = std::move(truth);
  t.dice_threshold = threshold;
  return t;
}

bool check_termination(const Termination& rule, const Vector& x_new,
                       const Vector& x_old, const DcProblem& prob) {
  switch (rule.kind) {
    case Termination::Kind::RelChange: {
      double denom = std::max(1.0, x_new.norm());
      return (x_new - x_old).norm() / denom < rule.epsilon;
    }
    case Termination::Kind::StepNorm:
      return (x_new - x_old).norm() <= rule.epsilon;
    case Termination::Kind::GradNorm: {
      if (!prob.smooth_energy())
        throw std::invalid_argument(
            "gradient-norm termination requires a differentiable energy");
      Vector g = prob.f->gradient(x_new) + prob.g1->subgradient(x_new) -
                 prob.g2->subgradient(x_new);
      return g.norm() <= rule.epsilon;
    }
    case Termination::Kind::DiceBound: {
      if (!rule.truth)
        throw std::invalid_argument("dice termination requires a truth mask");
      return dice_score(x_new, *rule.truth) >= rule.dice_threshold;
    }
  }
  throw std::logic_error("unknown termination rule");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::StationaryDZero: return "stationary_d_zero";
    case SolveStatus::NanAbort: return "nan_abort";
  }
  return "unknown";
}

SolveReport solve(const DcProblem& prob, const SolverConfig& config) {
  using Clock = std::chrono::steady_clock;
  const AlgorithmShape shape = algorithm_shape(config.algorithm);

  SolverConfig cfg = config;  // local copy for the monotone-search override
  if (shape.search == LineSearchMode::Monotone) cfg.line_search.omega = 0.0;
  if (shape.search != LineSearchMode::None) cfg.line_search.validate();

  SubproblemEngine engine(prob, shape.form, cfg.precond);

  SolveReport rep;
  rep.lyapunov_scale = engine.lyapunov_scale();
  rep.metric_known = engine.metric_known();
  rep.mu_min_m = engine.mu_min();
  rep.warnings = engine.setup_warnings();
  if (shape.extrapolation == ExtrapolationPolicy::Lsde)
    rep.c_lambda_value = c_lambda(cfg.lsde, cfg.line_search.lambda_max);
  rep.n0 = shape.search == LineSearchMode::NonMonotone
               ? monotonicity_threshold(cfg.line_search)
               : 0;

  Vector x = cfg.x0.size() > 0 ? cfg.x0 : Vector::Zero(prob.dim());
  prob.check_dim(x);
  Vector x_prev = x;
  double beta = 0.0;

  ExtrapolationState fista;
  fista.policy = shape.extrapolation;
  fista.fixed_period = cfg.fista_fixed_period;

  rep.initial_energy = prob.energy(x);
  rep.x = x;
  rep.final_energy = rep.initial_energy;

  bool cg_warned = false;
  const auto t_start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
  };

  long n = 0;
  for (; n < cfg.max_iter; ++n) {
    Vector xi = prob.g2->subgradient(x);
    Vector y = beta == 0.0 ? x : Vector(x + beta * (x - x_prev));

    InnerSolveStats inner;
    Vector xbar = engine.solve(y, xi, &inner);
    if (inner.budget_exhausted && !cg_warned) {
      rep.warnings.push_back("inner cg stopped on its iteration budget at n=" +
                             std::to_string(n));
      cg_warned = true;
    }

    Vector d = xbar - x;
    const double d_norm = d.norm();
    if (d_norm == 0.0) {
      rep.status = SolveStatus::StationaryDZero;
      rep.x = xbar;
      rep.final_energy = prob.energy(xbar);
      rep.iterations = n;
      break;
    }

    double e_xbar = prob.energy(xbar);
    if (std::isnan(e_xbar)) {
      rep.status = SolveStatus::NanAbort;
      rep.nan_iteration = n;
      rep.warnings.push_back("energy became NaN at iteration " + std::to_string(n));
      rep.iterations = n;
      break;
    }

    LineSearchResult search;
    Vector x_next;
    double e_next;
    if (shape.search != LineSearchMode::None) {
      auto ray = prob.energy_ray(xbar, d);
      try {
        search = nonmonotone_search_ray(ray, e_xbar, d_norm * d_norm, n,
                                        cfg.line_search);
      } catch (const std::runtime_error& err) {
        rep.status = SolveStatus::NanAbort;
        rep.nan_iteration = n;
        rep.warnings.push_back(err.what());
        rep.iterations = n;
        break;
      }
      if (search.accepted) {
        x_next = xbar + search.lambda * d;
        e_next = search.trial_energy;
      } else {
        x_next = xbar;
        e_next = e_xbar;
      }
    } else {
      x_next = xbar;
      e_next = e_xbar;
    }

    // extrapolation update for the next iteration
    double beta_next = 0.0;
    switch (shape.extrapolation) {
      case ExtrapolationPolicy::None:
        break;
      case ExtrapolationPolicy::Lsde:
        beta_next = lsde_update(search, cfg.lsde);
        break;
      default: {
        bool restart = shape.extrapolation == ExtrapolationPolicy::FistaAdaptiveRestart
                           ? adaptive_restart_signal(y, x_next, x)
                           : false;
        fista = fista_beta_step(fista, restart, n);
        beta_next = fista.beta;
        break;
      }
    }

    TraceRow row;
    row.n = n;
    row.energy = e_next;
    row.energy_xbar = e_xbar;
    row.d_norm = d_norm;
    row.step_norm = (x_next - x).norm();
    row.lambda = search.lambda;
    row.beta = beta;
    row.beta_next = beta_next;
    row.a_n = search.trials;
    row.delta_lambda = search.lambda > 0.0 ? 1 : 0;
    row.nu = search.nu;
    if (cfg.trace_level == TraceLevel::Full) {
      if (engine.metric_known())
        row.lyap_a = e_next + 0.5 * engine.lyapunov_scale() *
                                  engine.metric_norm_sq(d);
      if (engine.metric_known() && !prob.g1->smooth() &&
          prob.g1_upper_modulus > 0.0) {
        Vector w_bar = prob.g1->witness_subgradient(xbar, x_next);
        double conj = xbar.dot(w_bar) - prob.g1->value(xbar);
        row.lyap_h = prob.f->value(x_next) + x_next.dot(w_bar) - conj -
                     prob.g2->value(x_next) +
                     0.5 * engine.lyapunov_scale() * prob.g1_upper_modulus *
                         (x_next - xbar).squaredNorm() +
                     0.5 * engine.lyapunov_scale() * engine.metric_norm_sq(d);
      }
      row.crit_residual = criticality_residual(prob, x_next);
    }
    if (cfg.distance_ref) row.dist_ref = (x_next - *cfg.distance_ref).norm();
    row.wall_ms = elapsed_ms();
    rep.trace.push_back(std::move(row));

    const bool done = check_termination(cfg.termination, x_next, x, prob);
    x_prev = std::move(x);
    x = std::move(x_next);
    beta = beta_next;
    if (done) {
      rep.status = SolveStatus::Converged;
      rep.iterations = n + 1;
      rep.x = x;
      rep.final_energy = e_next;
      break;
    }
    if (n + 1 == cfg.max_iter) {
      rep.status = SolveStatus::MaxIter;
      rep.iterations = cfg.max_iter;
      rep.x = x;
      rep.final_energy = e_next;
    }
  }
  if (n >= cfg.max_iter && rep.status != SolveStatus::MaxIter) {
    rep.status = SolveStatus::MaxIter;
    rep.iterations = cfg.max_iter;
  }
  rep.wall_seconds = elapsed_ms() / 1000.0;
  return rep;
}

}  // namespace dcopt
