#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include "dcopt/scad.hpp"
#include "dcopt/subproblem.hpp"
#include "test_support.hpp"

using namespace dcopt;

TEST_CASE("identity system halves the target") {
  // A = I, M = I so A+M = 2I: x = y + (b - y)/2
  DenseOperator a(Matrix::Identity(2, 2));
  Vector b(2), y(2);
  b << 2.0, 4.0;
  y << 0.0, 0.0;
  Vector x = preconditioned_step(a, b, y, Preconditioner::identity(1.0, 2));
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("a stationary anchor is a fixed point") {
  Rng rng(1);
  Matrix m = test::random_spd(rng, 6);
  DenseOperator a(m);
  Vector y = test::random_vector(rng, 6);
  Vector b = a.apply(y);
  for (auto p : {Preconditioner::identity(0.7, 6), Preconditioner::jacobi(5),
                 Preconditioner::cg(), Preconditioner::none()}) {
    Vector x = preconditioned_step(a, b, y, p);
    CHECK((x - y).norm() <= 1e-12 * (1.0 + y.norm()));
  }
}

TEST_CASE("exact mode equals the direct solve of the weighted system") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Index n = 20;
    Matrix am = test::random_spd(rng, n);
    Matrix mm = test::random_spd(rng, n, 0.2, 1.0);
    auto a = DenseOperator(am);
    Vector y = test::random_vector(rng, n);
    Vector b = test::random_vector(rng, n);
    Vector got = preconditioned_step(a, b, y,
                                     Preconditioner::exact(std::make_shared<DenseOperator>(mm)));
    Vector want = Eigen::LDLT<Matrix>(am + mm).solve(mm * y + b);
    CHECK((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
  }
}

TEST_CASE("cg reaches the direct solution at tight tolerance") {
  Rng rng(3);
  Matrix am = test::random_spd(rng, 30);
  DenseOperator a(am);
  Vector y = test::random_vector(rng, 30);
  Vector b = test::random_vector(rng, 30);
  InnerSolveStats stats;
  Vector got = preconditioned_step(a, b, y, Preconditioner::cg(1e-13, 500), &stats);
  Vector want = Eigen::LDLT<Matrix>(am).solve(b);
  CHECK((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
  CHECK_FALSE(stats.budget_exhausted);
  CHECK(stats.final_residual <= 1e-8);
}

TEST_CASE("cg flags an exhausted budget and returns its best iterate") {
  Rng rng(4);
  Matrix am = test::random_spd(rng, 40, 0.01, 10.0);
  DenseOperator a(am);
  Vector y = Vector::Zero(40);
  Vector b = test::random_vector(rng, 40);
  InnerSolveStats stats;
  Vector got = preconditioned_step(a, b, y, Preconditioner::cg(1e-14, 3), &stats);
  CHECK(stats.budget_exhausted);
  CHECK(got.allFinite());
}

TEST_CASE("jacobi sweeps converge toward the exact solve on dominant systems") {
  Rng rng(5);
  const Index n = 25;
  Matrix am = test::random_spd(rng, n);
  am.diagonal().array() += am.cwiseAbs().rowwise().sum().maxCoeff();  // force dominance
  DenseOperator a(am);
  Vector y = test::random_vector(rng, n);
  Vector b = test::random_vector(rng, n);
  Vector exact = Eigen::LDLT<Matrix>(am).solve(b);
  double prev = (y - exact).norm();
  for (int sweeps : {1, 3, 6, 12}) {
    Vector x = preconditioned_step(a, b, y, Preconditioner::jacobi(sweeps));
    double err = (x - exact).norm();
    CHECK(err < prev);
    prev = err;
  }
  CHECK(strictly_diagonally_dominant(a));
}

TEST_CASE("linearized subproblem reduces to the soft threshold") {
  // 1-d: y = 1, gradient term g = 0.5, L = 1, mu = 0.2 -> shrink(0.5, 0.2) = 0.3
  DcProblem prob;
  QuadraticForm fq;
  fq.hessian = std::make_shared<ScaledIdentityOperator>(1.0, 1);
  fq.linear = Vector::Constant(1, 0.5);  // grad f(y) = y - 0.5, Lipschitz 1
  prob.f = std::make_shared<QuadraticSmooth>(fq, 1.0);
  prob.g1 = std::make_shared<SeparableConvex>(1, std::make_shared<AbsScalar>(0.2));
  prob.g2 = std::make_shared<SeparableConvex>(1, std::make_shared<ZeroScalar>());

  Vector y(1), xi(1);
  y << 1.0;
  xi << 0.0;
  // grad f(1) - xi = 0.5
  Vector x = solve_linearized_subproblem(prob, y, xi, Preconditioner::identity(1.0, 1));
  CHECK(x[0] == doctest::Approx(0.3).epsilon(1e-14));

  // grid oracle over the scalar objective <g, u> + (1/2)(u-y)^2 + mu|u|
  double best = 1e300, best_u = 0.0;
  for (double u = -2.0; u <= 2.0; u += 1e-5) {
    double v = 0.5 * u + 0.5 * (u - 1.0) * (u - 1.0) + 0.2 * std::abs(u);
    if (v < best) { best = v; best_u = u; }
  }
  CHECK(best_u == doctest::Approx(x[0]).epsilon(1e-4));

  // small anchors collapse to zero: y = 0.1, g = 0 -> shrink(0.1, 0.2) = 0
  QuadraticForm fz;
  fz.hessian = std::make_shared<ScaledIdentityOperator>(1.0, 1);
  fz.linear = Vector::Constant(1, 0.1);  // grad f(0.1) = 0
  DcProblem prob2 = prob;
  prob2.f = std::make_shared<QuadraticSmooth>(fz, 1.0);
  Vector y2(1);
  y2 << 0.1;
  Vector x2 = solve_linearized_subproblem(prob2, y2, xi, Preconditioner::identity(1.0, 1));
  CHECK(x2[0] == 0.0);
}

TEST_CASE("linearized subproblem keeps a stationary anchor with no penalty") {
  // grad f(y) - xi = 0 and g1 = 0: xbar = y
  DcProblem prob;
  QuadraticForm fq;
  fq.hessian = std::make_shared<ScaledIdentityOperator>(1.0, 3);
  fq.linear = Vector::Zero(3);
  prob.f = std::make_shared<QuadraticSmooth>(fq, 1.0);
  prob.g1 = std::make_shared<SeparableConvex>(3, std::make_shared<ZeroScalar>());
  prob.g2 = std::make_shared<SeparableConvex>(3, std::make_shared<ZeroScalar>());
  Vector y(3);
  y << 0.5, -1.0, 2.0;
  Vector xi = prob.f->gradient(y);  // cancels the linearization
  Vector x = solve_linearized_subproblem(prob, y, xi, Preconditioner::identity(1.0, 3));
  CHECK((x - y).norm() <= 1e-14);
}

TEST_CASE("implicit subproblem dispatches to the preconditioned iteration") {
  // f + g1 = ||y||^2/2, xi = 0, M = I: xbar = (M + I)^{-1} M y = y/2
  DcProblem prob;
  QuadraticForm fq;
  fq.hessian = std::make_shared<ScaledIdentityOperator>(1.0, 2);
  fq.linear = Vector::Zero(2);
  prob.f = std::make_shared<QuadraticSmooth>(fq, 1.0);
  QuadraticForm gq;
  gq.hessian = std::make_shared<ScaledIdentityOperator>(0.0, 2);
  gq.linear = Vector::Zero(2);
  prob.g1 = std::make_shared<QuadraticConvex>(gq, 0.0);
  prob.g2 = std::make_shared<SeparableConvex>(2, std::make_shared<ZeroScalar>());
  Vector y(2), xi(2);
  y << 2.0, 2.0;
  xi << 0.0, 0.0;
  Vector x = solve_implicit_subproblem(prob, y, xi, Preconditioner::identity(1.0, 2));
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("implicit prox path matches the first-order condition for scad") {
  SyntheticSpec spec;
  spec.m = 12;
  spec.k = 25;
  spec.sparsity = 4;
  auto data = std::make_shared<LeastSquaresData>(synthetic_instance(spec, 9));
  ScadParams sp;
  DcProblem prob = build_scad_problem(data, sp, ScadVariant::L1, ScadSplit::Standard);
  Rng rng(10);
  Vector y = test::random_vector(rng, prob.dim(), 0.01);
  Vector xi = prob.g2->subgradient(y);
  Vector x = solve_implicit_subproblem(prob, y, xi,
                                       Preconditioner::spectral_gap(data->lambda_ata));

  // residual of -xi + M(x - y) + grad f(x) + dg1(x) must admit 0, i.e. the
  // smooth part lands in [-mu, mu] on zero coordinates and cancels elsewhere
  Vector smooth = prob.f->gradient(x) - xi;
  Vector my = data->lambda_ata * (x - y) - (prob.f->gradient(x) - prob.f->gradient(y));
  for (Index i = 0; i < x.size(); ++i) {
    double s = smooth[i] + my[i];
    if (x[i] != 0.0)
      CHECK(std::abs(s + (x[i] > 0 ? sp.mu : -sp.mu)) <= 1e-10);
    else
      CHECK(std::abs(s) <= sp.mu + 1e-10);
  }
}

TEST_CASE("spectral gap estimate dominates the true largest eigenvalue") {
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    Matrix m = test::random_spd(rng, 30);
    DenseOperator a(m);
    double est = estimate_largest_eigenvalue(a);
    double truth = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().maxCoeff();
    CHECK(est <= truth + 1e-12);
    CHECK(1.01 * est >= truth * 0.999);
  }
}

TEST_CASE("operator symmetry probes pass for the shipped operators") {
  Rng rng(12);
  Matrix a(8, 5);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  GramOperator gram(std::make_shared<Matrix>(a));
  CHECK(symmetry_defect(gram, 20, 13) <= 1e-12);

  Matrix spd = test::random_spd(rng, 7);
  DenseOperator d(spd);
  CHECK(symmetry_defect(d, 20, 14) <= 1e-12);
}

TEST_CASE("jacobi and cg kinds refuse non-quadratic subproblems") {
  Matrix a1(2, 2);
  a1 << 1.0, 0.2, 0.2, 1.0;
  auto data = std::make_shared<LeastSquaresData>(make_least_squares(a1, Vector::Zero(2)));
  ScadParams sp;
  sp.mu = 0.1;
  sp.theta = 5.0;
  DcProblem prob = build_scad_problem(data, sp, ScadVariant::L1, ScadSplit::Standard);
  CHECK_THROWS_AS(
      SubproblemEngine(prob, SubproblemForm::Implicit, Preconditioner::jacobi(5)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      SubproblemEngine(prob, SubproblemForm::Linearized, Preconditioner::jacobi(5)),
      std::invalid_argument);
}
