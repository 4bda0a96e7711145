#include "dcopt/linesearch.hpp"

#include <stdexcept>
#include <string>

namespace dcopt {

double p_value(PSchedule s, long n) {
  switch (s) {
    case PSchedule::Linear: return static_cast<double>(n + 1);
    case PSchedule::Sqrt: return std::sqrt(static_cast<double>(n + 1));
    case PSchedule::Quadratic: {
      double v = static_cast<double>(n + 1);
      return v * v;
    }
  }
  return static_cast<double>(n + 1);
}

void LineSearchParams::validate() const {
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must be in (0,1)");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (omega < 0.0) throw std::invalid_argument("omega must be >= 0");
  if (max_trials < 0) throw std::invalid_argument("max_trials must be >= 0");
  if (min_step < 0.0) throw std::invalid_argument("min_step must be >= 0");
}

double nu_schedule(long n, double omega, double d_norm_sq, PSchedule s) {
  if (d_norm_sq == 0.0) return 0.0;
  return omega * d_norm_sq / p_value(s, n);
}

long monotonicity_threshold(const LineSearchParams& p) {
  const double target = p.eta * p.lambda_max * std::pow(p.rho, p.max_trials);
  const long cap = 100000000L;
  for (long n = 0; n < cap; ++n) {
    if (p.omega / p_value(p.schedule, n) < target) return n;
  }
  return cap;
}

LineSearchResult nonmonotone_search_ray(const RayEnergyFn& energy_at,
                                        double energy_at_xbar,
                                        double d_norm_sq, long n,
                                        const LineSearchParams& p) {
  p.validate();
  if (d_norm_sq <= 0.0)
    throw std::invalid_argument("line search requires a nonzero direction");
  if (std::isnan(energy_at_xbar))
    throw std::runtime_error("line search anchor energy is NaN");

  LineSearchResult r;
  r.nu = nu_schedule(n, p.omega, d_norm_sq, p.schedule);

  double lambda = p.lambda_max;
  for (int k = 1; k <= p.max_trials; ++k) {
    if (lambda < p.min_step) break;
    double e = energy_at(lambda);
    if (std::isnan(e))
      throw std::runtime_error("energy oracle returned NaN at line-search trial " +
                               std::to_string(k));
    r.trial_energies.push_back(e);
    if (e <= energy_at_xbar - p.eta * lambda * d_norm_sq + r.nu) {
      r.accepted = true;
      r.lambda = lambda;
      r.trials = k;
      r.trial_energy = e;
      return r;
    }
    lambda *= p.rho;
  }
  r.accepted = false;
  r.lambda = 0.0;
  r.trials = p.max_trials + 1;
  return r;
}

LineSearchResult nonmonotone_search(const EnergyFn& energy, const Vector& xbar,
                                    double energy_at_xbar, const Vector& d,
                                    long n, const LineSearchParams& p) {
  if (d.size() != xbar.size())
    throw std::invalid_argument("direction/anchor dimension mismatch");
  const double d_norm_sq = d.squaredNorm();
  return nonmonotone_search_ray(
      [&](double lambda) { return energy(xbar + lambda * d); }, energy_at_xbar,
      d_norm_sq, n, p);
}

void LsdeParams::validate() const {
  if (!(b1 > 0.0)) throw std::invalid_argument("b1 must be > 0");
  if (!(b2 >= 0.0 && b2 < 1.0)) throw std::invalid_argument("b2 must be in [0,1)");
}

double lsde_update(const LineSearchResult& r, const LsdeParams& p) {
  p.validate();
  if (r.accepted) return 1.0 / (1.0 + p.b1 + r.lambda);
  return p.b2;
}

double c_lambda(const LsdeParams& p, double lambda_max) {
  p.validate();
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be > 0");
  const double one_plus = 1.0 + lambda_max;
  const double one_plus_b = 1.0 + p.b1 + lambda_max;
  const double c1 = p.b1 * (1.0 + p.b1) / (one_plus * one_plus * one_plus_b * one_plus_b);
  const double c2 = 0.5 * (1.0 - p.b2 * p.b2);
  return std::min(c1, c2);
}

ExtrapolationState fista_beta_step(ExtrapolationState s, bool restart_signal,
                                   long iteration) {
  switch (s.policy) {
    case ExtrapolationPolicy::None:
      s.beta = 0.0;
      return s;
    case ExtrapolationPolicy::Lsde:
      throw std::logic_error("LSDE updates go through lsde_update");
    default:
      break;
  }
  bool restart = false;
  if (s.policy == ExtrapolationPolicy::FistaFixedRestart)
    restart = ((iteration + 1) % s.fixed_period == 0);
  else if (s.policy == ExtrapolationPolicy::FistaAdaptiveRestart)
    restart = restart_signal;

  if (restart) {
    s.theta_prev = 1.0;
    s.theta = 1.0;
    s.beta = 0.0;
    return s;
  }
  const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s.theta * s.theta));
  s.beta = (s.theta - 1.0) / theta_next;
  s.theta_prev = s.theta;
  s.theta = theta_next;
  return s;
}

bool adaptive_restart_signal(const Vector& y_n, const Vector& x_next,
                             const Vector& x_n) {
  if (y_n.size() != x_next.size() || x_next.size() != x_n.size())
    throw std::invalid_argument("restart signal dimension mismatch");
  return (y_n - x_next).dot(x_next - x_n) > 0.0;
}

}  // namespace dcopt
