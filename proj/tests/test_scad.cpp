#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcopt/scad.hpp"
#include "test_support.hpp"

using namespace dcopt;

namespace {

const ScadParams kPaperParams = [] {
  ScadParams p;
  p.mu = 5e-4;
  p.theta = 10.0;
  return p;
}();

// quadrature oracle: tilde_s(x) = integral_0^{|x|} [min(theta mu, u) - mu]_+ /
// (theta - 1) du, evaluated piecewise-exactly on a fine grid (trapezoid on a
// piecewise-linear integrand is exact up to roundoff)
double tilde_s_quadrature(double x, const ScadParams& p) {
  const double ax = std::abs(x);
  const long steps = 20000;
  double acc = 0.0;
  double prev = 0.0;
  for (long i = 1; i <= steps; ++i) {
    double u = ax * static_cast<double>(i) / steps;
    double integrand = std::max(std::min(p.theta * p.mu, u) - p.mu, 0.0) / (p.theta - 1.0);
    acc += 0.5 * (prev + integrand) * (ax / steps);
    prev = integrand;
  }
  return acc;
}

}  // namespace

TEST_CASE("tilde-s agrees with the defining integral") {
  for (double x : {0.0, 2e-4, 5e-4, 1e-3, 3e-3, 5e-3, 7e-3, -4e-3, 0.1}) {
    CHECK(tilde_s(x, kPaperParams) ==
          doctest::Approx(tilde_s_quadrature(x, kPaperParams)).epsilon(1e-6));
  }
}

TEST_CASE("tilde-s hits the frozen piecewise values") {
  const ScadParams& p = kPaperParams;
  CHECK(tilde_s(0.5 * p.mu, p) == 0.0);
  CHECK(tilde_s(-p.mu, p) == 0.0);
  CHECK(tilde_s(2.0 * p.mu, p) == doctest::Approx(1.3888888888888889e-08).epsilon(1e-14));
  // continuity at theta*mu: both pieces give (theta-1) mu^2 / 2
  const double inner = (p.theta * p.mu - p.mu) * (p.theta * p.mu - p.mu) / (2.0 * (p.theta - 1.0));
  const double outer = p.mu * (p.theta * p.mu) - p.mu * p.mu * (p.theta + 1.0) / 2.0;
  CHECK(inner == doctest::Approx(1.125e-06).epsilon(1e-14));
  CHECK(outer == doctest::Approx(1.125e-06).epsilon(1e-14));
  CHECK(std::abs(inner - outer) <= 1e-14);
  CHECK(tilde_s(p.theta * p.mu, p) == doctest::Approx(1.125e-06).epsilon(1e-14));
}

TEST_CASE("tilde-s is continuous at both breakpoints") {
  const ScadParams& p = kPaperParams;
  for (double kink : {p.mu, p.theta * p.mu}) {
    double below = tilde_s(kink * (1.0 - 1e-12), p);
    double above = tilde_s(kink * (1.0 + 1e-12), p);
    CHECK(std::abs(below - above) <= 1e-14);
  }
}

TEST_CASE("tilde-s gradient matches the printed closed form and differences") {
  const ScadParams& p = kPaperParams;
  CHECK(tilde_s_grad(0.3 * p.mu, p) == 0.0);
  CHECK(tilde_s_grad(20.0 * p.mu, p) == doctest::Approx(p.mu).epsilon(1e-15));
  CHECK(tilde_s_grad(-20.0 * p.mu, p) == doctest::Approx(-p.mu).epsilon(1e-15));

  Rng rng(3);
  int checked = 0;
  while (checked < 100) {
    double x = rng.uniform(-8.0 * p.theta * p.mu, 8.0 * p.theta * p.mu);
    bool off = true;
    for (double kink : {p.mu, p.theta * p.mu})
      if (std::abs(std::abs(x) - kink) < 1e-3 * kink) off = false;
    if (!off) continue;
    ++checked;
    const double h = 1e-6 * (1.0 + std::abs(x));
    double fd = (tilde_s(x + h, p) - tilde_s(x - h, p)) / (2.0 * h);
    CHECK(std::abs(tilde_s_grad(x, p) - fd) <= 1e-6 * (1.0 + std::abs(fd)));
    // printed form
    double printed = (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) *
                     std::max(std::min(p.theta * p.mu, std::abs(x)) - p.mu, 0.0) /
                     (p.theta - 1.0);
    CHECK(tilde_s_grad(x, p) == doctest::Approx(printed).epsilon(1e-15));
  }
}

TEST_CASE("scad value: zero at zero, kink value, saturation") {
  const ScadParams& p = kPaperParams;
  Vector zero = Vector::Zero(3);
  CHECK(scad_value(zero, p) == 0.0);

  Vector at_mu = Vector::Zero(1);
  at_mu[0] = p.mu;
  CHECK(scad_value(at_mu, p) == doctest::Approx(2.5e-07).epsilon(1e-14));

  for (double x : {p.theta * p.mu, 2.0 * p.theta * p.mu, 10.0}) {
    Vector v = Vector::Zero(1);
    v[0] = x;
    CHECK(scad_value(v, p) == doctest::Approx(1.375e-06).epsilon(1e-12));
  }
}

TEST_CASE("scad is nondecreasing in |x| and constant beyond theta mu") {
  const ScadParams& p = kPaperParams;
  double prev = 0.0;
  for (double x = 0.0; x <= 2.0 * p.theta * p.mu; x += p.mu / 10.0) {
    Vector v = Vector::Constant(1, x);
    double s = scad_value(v, p);
    CHECK(s >= prev - 1e-18);
    prev = s;
  }
}

TEST_CASE("huber function and gradient follow both branches") {
  const double alpha = 0.25;
  CHECK(huber(0.0, alpha) == 0.0);
  CHECK(huber_grad(0.0, alpha) == 0.0);
  CHECK(huber(alpha, alpha) == doctest::Approx(alpha / 2.0).epsilon(1e-15));
  CHECK(huber(alpha * (1 + 1e-12), alpha) == doctest::Approx(alpha / 2.0).epsilon(1e-9));
  CHECK(huber(3.0 * alpha, alpha) == doctest::Approx(2.5 * alpha).epsilon(1e-15));
  CHECK(huber_grad(0.1, alpha) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(huber_grad(-2.0, alpha) == -1.0);
}

TEST_CASE("huber-scad composite matches its four regions") {
  ScadParams p;
  p.mu = 5e-4;
  p.theta = 10.0;
  p.alpha = 2.5e-4;
  CHECK(huber_scad(0.0, p) == 0.0);
  // continuity at alpha: region 1 and 2 both give mu * alpha / 2
  CHECK(huber_scad(p.alpha, p) == doctest::Approx(p.mu * p.alpha / 2.0).epsilon(1e-14));
  double above = huber_scad(p.alpha * (1 + 1e-9), p);
  CHECK(std::abs(above - p.mu * p.alpha / 2.0) <= 1e-12);
  // saturation at mu (mu (theta+1) - alpha)/2 = 1.3125e-6
  for (double x : {p.theta * p.mu, 5.0 * p.theta * p.mu}) {
    CHECK(huber_scad(x, p) == doctest::Approx(1.3125e-06).epsilon(1e-12));
  }
  // cross-check as mu*huber - tilde_s at a generic point
  double x = 3.3 * p.mu;
  CHECK(huber_scad(x, p) ==
        doctest::Approx(p.mu * huber(x, p.knee()) - tilde_s(x, p)).epsilon(1e-15));
}

TEST_CASE("huber-scad is continuous at every breakpoint") {
  ScadParams p;
  p.mu = 5e-4;
  p.theta = 10.0;
  for (double kink : {p.knee(), p.mu, p.theta * p.mu}) {
    double lo = huber_scad(kink * (1.0 - 1e-12), p);
    double hi = huber_scad(kink * (1.0 + 1e-12), p);
    CHECK(std::abs(lo - hi) <= 1e-14);
  }
}

TEST_CASE("tilde-s is midpoint convex on random pairs") {
  const ScadParams& p = kPaperParams;
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    double a = rng.uniform(-0.02, 0.02);
    double b = rng.uniform(-0.02, 0.02);
    double mid = tilde_s(0.5 * (a + b), p);
    CHECK(mid <= 0.5 * (tilde_s(a, p) + tilde_s(b, p)) + 1e-12);
  }
}

TEST_CASE("both splits evaluate to the same energy") {
  SyntheticSpec spec;
  spec.m = 18;
  spec.k = 35;
  spec.sparsity = 6;
  auto data = std::make_shared<LeastSquaresData>(synthetic_instance(spec, 21));
  for (ScadVariant variant : {ScadVariant::L1, ScadVariant::Huber}) {
    ScadParams p;
    DcProblem std_split = build_scad_problem(data, p, variant, ScadSplit::Standard);
    DcProblem alt_split = build_scad_problem(data, p, variant, ScadSplit::Bdca);
    Rng rng(23);
    for (int t = 0; t < 100; ++t) {
      Vector x = test::random_vector(rng, std_split.dim(), 0.02);
      double e1 = std_split.energy(x);
      double e2 = alt_split.energy(x);
      CHECK(std::abs(e1 - e2) <= 1e-12 * std::max(1.0, std::abs(e1)));
    }
  }
}

TEST_CASE("the huber variant is C1 even near the knee") {
  SyntheticSpec spec;
  spec.m = 10;
  spec.k = 20;
  spec.sparsity = 3;
  auto data = std::make_shared<LeastSquaresData>(synthetic_instance(spec, 33));
  ScadParams p;
  DcProblem prob = build_scad_problem(data, p, ScadVariant::Huber, ScadSplit::Standard);
  Rng rng(35);
  auto energy = [&](const Vector& v) { return prob.energy(v); };
  int checked = 0;
  while (checked < 50) {
    Vector x = test::random_vector(rng, prob.dim(), 2.0 * p.knee());
    bool off = true;
    for (Index i = 0; i < x.size() && off; ++i)
      for (double kink : {p.knee(), p.mu, p.theta * p.mu})
        if (std::abs(std::abs(x[i]) - kink) < 1e-3 * kink) off = false;
    if (!off) continue;
    ++checked;
    Vector g = prob.f->gradient(x) + prob.g1->subgradient(x) - prob.g2->subgradient(x);
    Vector fd = test::fd_gradient(energy, x);
    CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
  }
}

TEST_CASE("synthetic instances are reproducible and carry a safe gap scale") {
  SyntheticSpec spec;
  spec.m = 30;
  spec.k = 50;
  spec.sparsity = 8;
  Vector truth1, truth2;
  LeastSquaresData d1 = synthetic_instance(spec, 77, &truth1);
  LeastSquaresData d2 = synthetic_instance(spec, 77, &truth2);
  CHECK((*d1.a - *d2.a).norm() == 0.0);
  CHECK((d1.b - d2.b).norm() == 0.0);
  CHECK((truth1 - truth2).norm() == 0.0);
  CHECK(truth1.cwiseAbs().sum() == doctest::Approx(spec.sparsity));

  Matrix gram = d1.a->transpose() * (*d1.a);
  double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
  CHECK(d1.lambda_ata >= top);
  CHECK(d1.lambda_ata <= 1.02 * top);
}

TEST_CASE("parameter validation") {
  ScadParams p;
  p.theta = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  ScadParams q;
  q.alpha = q.mu;  // knee must stay below mu
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
