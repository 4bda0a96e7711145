#include "dcopt/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace dcopt {

double lyapunov_a(const DcProblem& prob, const Vector& x_next,
                  const Vector& xbar, const Vector& x_n, const SymOperator* m,
                  double scale) {
  Vector diff = xbar - x_n;
  double pen = m ? m->quad(diff) : 0.0;
  return prob.energy(x_next) + 0.5 * scale * pen;
}

double lyapunov_h(const DcProblem& prob, const Vector& x_next,
                  const Vector& w_bar, const Vector& xbar, const Vector& x_n,
                  const SymOperator* m, double sigma, double scale) {
  // w_bar must be a subgradient of g1 at xbar; check it against x_next
  const double g1_bar = prob.g1->value(xbar);
  const double g1_next = prob.g1->value(x_next);
  if (g1_next < g1_bar + w_bar.dot(x_next - xbar) - 1e-8)
    throw std::invalid_argument(
        "w_bar fails the subgradient inequality at xbar");

  // Fenchel equality at the pair: g1*(w_bar) = <xbar, w_bar> - g1(xbar)
  const double conj = xbar.dot(w_bar) - g1_bar;
  Vector diff = xbar - x_n;
  double pen = m ? m->quad(diff) : 0.0;
  return prob.f->value(x_next) + x_next.dot(w_bar) - conj -
         prob.g2->value(x_next) +
         0.5 * scale * sigma * (x_next - xbar).squaredNorm() +
         0.5 * scale * pen;
}

double criticality_residual(const DcProblem& prob, const Vector& x) {
  prob.check_dim(x);
  Vector smooth = prob.f->gradient(x) - prob.g2->subgradient(x);
  if (prob.g1->smooth()) return (smooth + prob.g1->subgradient(x)).norm();

  const auto* h = dynamic_cast<const AbsScalar*>(prob.g1->separable());
  if (!h)
    return (smooth + prob.g1->subgradient(x)).norm();  // selected subgradient

  const double mu = h->weight();
  const double w = prob.g1->separable_quad_weight();
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    double s = smooth[i] + w * x[i];
    double r;
    if (x[i] != 0.0)
      r = s + (x[i] > 0 ? mu : -mu);
    else
      r = std::max(std::abs(s) - mu, 0.0);  // clip into [-mu, mu]
    acc += r * r;
  }
  return std::sqrt(acc);
}

RateFit fit_local_rate(const std::vector<double>& dist) {
  RateFit fit;
  const long len = static_cast<long>(dist.size());
  const long end = len - 5;
  const long start = len - len / 3;
  if (end - start < 30) return fit;  // too-short tail

  // exact hit of the limit point within the window
  for (long i = start; i < end; ++i) {
    if (dist[static_cast<std::size_t>(i)] == 0.0) {
      fit.regime = RateRegime::Finite;
      return fit;
    }
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  long m = 0;
  for (long i = start; i < end; ++i) {
    double y = std::log(dist[static_cast<std::size_t>(i)]);
    if (!std::isfinite(y)) continue;
    double xi = static_cast<double>(i);
    sx += xi; sy += y; sxx += xi * xi; sxy += xi * y; syy += y * y;
    ++m;
  }
  if (m < 30) return fit;
  const double n = static_cast<double>(m);
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  const double slope = (n * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - slope * (sxy - sx * sy / n);
  fit.points_used = static_cast<int>(m);
  fit.eta_hat = std::exp(slope);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.regime = (fit.eta_hat > 0.0 && fit.eta_hat < 1.0 && fit.r_squared >= 0.9)
                   ? RateRegime::Linear
                   : RateRegime::Sublinear;
  return fit;
}

}  // namespace dcopt
