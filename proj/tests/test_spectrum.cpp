#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/spectrum.hpp"

using namespace tmlab;
using namespace tmlab::test;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

void check_invariants(const Eigenpair& e, const FemSpace& space, double tol) {
  const Eigen::VectorXd& u = e.u0.values;
  CHECK(std::abs(space.M1().dot(u)) <= 1e-10 * space.area());
  CHECK(std::abs(u.dot(space.M() * u) - 1) <= 1e-10);
  const double rq = u.dot(space.K() * u) / u.dot(space.M() * u);
  CHECK(std::abs(rq - e.lambda1) <= tol * e.lambda1);
  double bmax = -1e300;
  for (int v : boundary_vertices(space.surface())) bmax = std::max(bmax, u[v]);
  CHECK(bmax > 0);
  CHECK(e.lambda1 > 0);
}

}  // namespace

TEST_CASE("unit square lambda1 within 1% of pi^2") {
  const FemSpace space(unit_square(0.02));
  const Eigenpair e = first_eigenpair(space);
  CHECK(std::abs(e.lambda1 / kPi2 - 1) <= 0.01);
  CHECK(e.rayleigh_residual <= 1e-9);
  check_invariants(e, space, 1e-9);
  // cos(pi x1) and cos(pi x2) share the eigenvalue
  CHECK(e.multiplicity == 2);
}

TEST_CASE("rectangle(2,1) lambda1 within 1% of pi^2/4") {
  const FemSpace space(build_domain(rectangle_spec(2, 1, 0.02)));
  const Eigenpair e = first_eigenpair(space);
  CHECK(std::abs(e.lambda1 / (kPi2 / 4) - 1) <= 0.01);
  CHECK(e.multiplicity == 1);
  check_invariants(e, space, 1e-9);
}

TEST_CASE("invariants hold with a conformal factor") {
  const FemSpace space(build_domain(round_spec(Shape::half_disk, 1, 0.05, "0.3*x1 - 0.2*x2^2")));
  const Eigenpair e = first_eigenpair(space, 1e-10);
  CHECK(e.rayleigh_residual <= 1e-10);
  CHECK(eigen_residual(e, space) == doctest::Approx(e.rayleigh_residual));
  check_invariants(e, space, 1e-10);
}

TEST_CASE("perturbing u0 by 1e-3 mean-zero noise raises the residual tenfold") {
  const FemSpace space(unit_square(0.05));
  const Eigenpair e = first_eigenpair(space);
  const double r0 = eigen_residual(e, space);
  Eigenpair p = e;
  const Eigen::VectorXd noise = random_mean_zero(space, 11);
  p.u0.values += 1e-3 * noise / noise.cwiseAbs().maxCoeff();
  CHECK(eigen_residual(p, space) >= 10 * r0);
}

TEST_CASE("constant field is not an eigenpair") {
  const FemSpace space(unit_square(0.1));
  CHECK_THROWS_AS(make_eigenpair(space, 1.0, Eigen::VectorXd::Constant(space.size(), 3.0)), InvalidArgument);
}

TEST_CASE("residual on a different surface is refused") {
  const FemSpace a(unit_square(0.1)), b(unit_square(0.2));
  const Eigenpair e = first_eigenpair(a);
  CHECK_THROWS_AS(eigen_residual(e, b), InvalidArgument);
}

TEST_CASE("non-convergence carries the last residual") {
  const FemSpace space(unit_square(0.05));
  EigenOptions o;
  o.max_iterations = 2;
  try {
    first_eigenpair(space, 1e-12, o);
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure& err) {
    CHECK(err.last_residual() > 1e-12);
    CHECK(std::isfinite(err.last_residual()));
  }
  CHECK_THROWS_AS(first_eigenpair(space, 0.0), InvalidArgument);
}

TEST_CASE("a tighter tol gives a smaller residual") {
  const FemSpace space(unit_square(0.1));
  const Eigenpair loose = first_eigenpair(space, 1e-6);
  const Eigenpair tight = first_eigenpair(space, 1e-12);
  CHECK(loose.rayleigh_residual <= 1e-6);
  CHECK(tight.rayleigh_residual <= 1e-12);
  CHECK(tight.rayleigh_residual < loose.rayleigh_residual);
}

TEST_CASE("lambda1 decreases under refinement at second order") {
  Surface s = unit_square(0.1);
  double lam[3];
  for (int k = 0; k < 3; ++k) {
    lam[k] = first_eigenpair(FemSpace(s)).lambda1;
    s = refine(s);
  }
  CHECK(lam[1] <= lam[0] + 1e-8);
  CHECK(lam[2] <= lam[1] + 1e-8);
  const double e0 = lam[0] - kPi2, e1 = lam[1] - kPi2, e2 = lam[2] - kPi2;
  CHECK(std::log2(e0 / e1) >= 1.8);
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("scaling the domain by 2 divides lambda1 by 4") {
  const double l1 = first_eigenpair(FemSpace(build_domain(rectangle_spec(1, 1, 0.05)))).lambda1;
  const double l2 = first_eigenpair(FemSpace(build_domain(rectangle_spec(2, 2, 0.1)))).lambda1;
  CHECK(l1 / l2 == doctest::Approx(4).epsilon(1e-8));
}

TEST_CASE("eigensolve is deterministic") {
  const FemSpace space(half_disk(0.05));
  const Eigenpair a = first_eigenpair(space), b = first_eigenpair(space);
  CHECK(a.lambda1 == b.lambda1);
  CHECK(a.u0.values == b.u0.values);
}
