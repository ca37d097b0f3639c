#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/moser.hpp"

using namespace tmlab;
using namespace tmlab::test;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// point of the constraint set, deterministic per seed
Field feasible(const FemSpace& space, unsigned seed, double scale = 1) {
  return space.field(scale * retract(random_vector(space.size(), seed), space));
}

const FemSpace& half_disk_space() {
  static const FemSpace space(half_disk(0.05));
  return space;
}

}  // namespace

TEST_CASE("functional of zero is the area") {
  const FemSpace space(build_domain(round_spec(Shape::half_disk, 1, 0.1, "x1")));
  const Field z = space.field(Eigen::VectorXd::Zero(space.size()));
  CHECK(functional(z, 0, 1, space).value == doctest::Approx(space.area()).epsilon(1e-14));
  CHECK(functional(z, 2, 5, space).value == doctest::Approx(space.area()).epsilon(1e-14));
}

TEST_CASE("functional decreases to the area as beta goes to 0") {
  const FemSpace& space = half_disk_space();
  const Field u = feasible(space, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (double beta : {4.0, 1.0, 0.1, 1e-2, 1e-4, 1e-8}) {
    const double F = functional(u, 0, beta, space).value;
    CHECK(F < prev);
    CHECK(F > space.area());
    prev = F;
  }
  CHECK(prev - space.area() < 1e-6);
}

TEST_CASE("functional of x1 - 1/2 matches a dense quadrature") {
  const FemSpace space(unit_square(0.05));
  const Eigen::VectorXd u = interpolate(space.surface(), [](double x, double) { return x - 0.5; });
  const double F = functional(space.field(u), 0, 1, space).value;
  const double oracle = dense_integral(space.surface(), u, [](double uq, double) { return std::exp(uq * uq); });
  CHECK(std::abs(F - oracle) <= 1e-8);
}

TEST_CASE("exponent clamp taints the value") {
  const FemSpace space(unit_square(0.2));
  const Field big = space.field(Eigen::VectorXd::Constant(space.size(), 30.0));
  const FunctionalValue v = functional(big, 0, 1, space);
  CHECK(v.tainted);
  CHECK(std::isfinite(v.value));
  CHECK_FALSE(functional(feasible(space, 1), 0, 1, space).tainted);
  CHECK_THROWS_AS(functional(big, 0, 0, space), InvalidArgument);
  CHECK_THROWS_AS(functional(big, -1, 1, space), InvalidArgument);
}

TEST_CASE("functional is non-decreasing in alpha and beta") {
  const FemSpace& space = half_disk_space();
  for (unsigned k = 0; k < 5; ++k) {
    const Field u = feasible(space, 40 + k);
    double prev = 0;
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
      const double F = functional(u, a, kTwoPi, space).value;
      CHECK(F >= prev);
      prev = F;
    }
    prev = 0;
    for (double b : {1.0, 3.0, 5.0, kTwoPi}) {
      const double F = functional(u, 1.0, b, space).value;
      CHECK(F >= prev);
      prev = F;
    }
  }
}

TEST_CASE("gradient matches central differences") {
  const FemSpace& space = half_disk_space();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  for (unsigned k = 0; k < 3; ++k) {
    const Field u = feasible(space, 200 + k);
    const double alpha = 0.5 * k, beta = kTwoPi - 0.5;
    const Eigen::VectorXd g = functional_gradient(u, alpha, beta, space);
    for (int j = 0; j < 10; ++j) {
      const int i = pick(rng);
      // fourth-order central stencil keeps round-off in F out of the comparison
      const double h = 1e-3;
      auto F_at = [&](double t) {
        Field w = u;
        w.values[i] += t;
        return functional(w, alpha, beta, space).value;
      };
      const double fd = (8 * (F_at(h) - F_at(-h)) - (F_at(2 * h) - F_at(-2 * h))) / (12 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::abs(g[i]));
    }
  }
}

TEST_CASE("coefficients of the zero field") {
  const FemSpace space(unit_square(0.1));
  const Field z = space.field(Eigen::VectorXd::Zero(space.size()));
  const ELCoefficients c = el_coefficients(z, 0.7, 0.5, space);
  // lambda_eps is the integral of u^2 e^{...}: zero here
  CHECK(c.lambda_eps == 0);
  CHECK(c.mu_eps == 0);
  CHECK(c.beta_eps == 1);
  CHECK(c.gamma_eps == doctest::Approx(0.7));
  CHECK(c.alpha_eps == doctest::Approx(kTwoPi - 0.5));
}

TEST_CASE("alpha = 0 gives beta_eps = 1 and gamma_eps = 0") {
  const FemSpace& space = half_disk_space();
  for (unsigned k = 0; k < 3; ++k) {
    const ELCoefficients c = el_coefficients(feasible(space, k), 0, 0.3, space);
    CHECK(c.beta_eps == 1);
    CHECK(c.gamma_eps == 0);
  }
}

TEST_CASE("coefficients obey their invariants") {
  const FemSpace& space = half_disk_space();
  for (unsigned k = 0; k < 5; ++k) {
    const Field u = feasible(space, 60 + k);
    const double alpha = 0.4 * (k + 1), eps = 0.5;
    const ELCoefficients c = el_coefficients(u, alpha, eps, space);
    const double n2 = std::pow(l2_norm(u, space), 2);
    CHECK(c.alpha_eps == doctest::Approx((kTwoPi - eps) * (1 + alpha * n2)).epsilon(1e-14));
    CHECK(c.beta_eps > 0.5);
    CHECK(c.beta_eps <= 1);
    CHECK(c.gamma_eps >= 0);
    CHECK(c.lambda_eps > 0);
  }
}

TEST_CASE("coefficients match a dense quadrature") {
  const FemSpace space(unit_square(0.2));
  const Field u = feasible(space, 5);
  const double alpha = 0.8, eps = 1.0;
  const ELCoefficients c = el_coefficients(u, alpha, eps, space);
  const double a = c.alpha_eps;
  const double lam = dense_integral(space.surface(), u.values,
                                    [a](double q, double) { return q * q * std::exp(a * q * q); });
  const double mom = dense_integral(space.surface(), u.values, [a](double q, double) { return q * std::exp(a * q * q); });
  CHECK(std::abs(c.lambda_eps - lam) <= 1e-8);
  CHECK(std::abs(c.mu_eps - c.beta_eps / space.area() * mom) <= 1e-8);
}

TEST_CASE("maximizer at alpha = 0, eps = pi is stationary and feasible") {
  const FemSpace space(half_disk(0.1));
  MaximizeOptions o;
  o.tol = 1e-7;
  const MaximizerReport rep = maximize_subcritical(space, 0, std::numbers::pi, o);
  const MaximizerResult& r = rep.best;
  CHECK(r.converged);
  CHECK(r.el_residual <= 1e-6);
  CHECK(el_residual(r.u_eps, r.coefficients, space) == doctest::Approx(r.el_residual));
  CHECK(std::abs(weighted_mean(r.u_eps.values, space)) <= 1e-12 * space.area());
  CHECK(std::abs(dirichlet_norm(r.u_eps, space) - 1) <= 1e-12);
  CHECK(r.F_value >= r.F_initial);
  CHECK(r.F_value >= space.area());
  CHECK(rep.seeds.size() == 2);
}

TEST_CASE("every seed ends feasible and satisfies the lambda_eps lower bound") {
  const FemSpace& space = half_disk_space();
  for (double alpha : {0.0, 1.0}) {
    const MaximizerReport rep = maximize_subcritical(space, alpha, 0.5);
    for (const MaximizerResult& r : rep.seeds) {
      CHECK(std::abs(weighted_mean(r.u_eps.values, space)) <= 1e-12 * space.area());
      CHECK(std::abs(dirichlet_norm(r.u_eps, space) - 1) <= 1e-12);
      const double a = r.coefficients.alpha_eps;
      const double F = functional(r.u_eps, 0, a, space).value;
      CHECK(r.coefficients.lambda_eps >= (F - space.area()) / a);
    }
  }
}

TEST_CASE("larger exponent gives a larger maximum") {
  const FemSpace& space = half_disk_space();
  const double F1 = maximize_subcritical(space, 0, 1.0).best.F_value;
  const double F05 = maximize_subcritical(space, 0, 0.5).best.F_value;
  CHECK(F1 <= F05);
}

TEST_CASE("maximum value is stable under refinement") {
  const double Fc = maximize_subcritical(FemSpace(unit_square(0.05)), 0, 0.5).best.F_value;
  const double Ff = maximize_subcritical(FemSpace(unit_square(0.025)), 0, 0.5).best.F_value;
  CHECK(std::abs(Ff / Fc - 1) <= 0.02);
}

TEST_CASE("alpha at or above lambda1 is refused") {
  const FemSpace space(half_disk(0.1));
  const Eigenpair e = first_eigenpair(space);
  MaximizeOptions o;
  o.eigen = e;
  CHECK_THROWS_AS(maximize_subcritical(space, e.lambda1, 0.5, o), PreconditionViolation);
  CHECK_THROWS_AS(maximize_subcritical(space, 1.1 * e.lambda1, 0.5, o), PreconditionViolation);
  CHECK_THROWS_AS(maximize_subcritical(space, 0, 0, o), PreconditionViolation);
  CHECK_THROWS_AS(maximize_subcritical(space, 0, kTwoPi, o), PreconditionViolation);
}

TEST_CASE("eigenfunction is not a solution of the Euler-Lagrange system") {
  const FemSpace& space = half_disk_space();
  const Eigenpair e = first_eigenpair(space);
  const Field u = space.field(retract(e.u0.values, space));
  const ELCoefficients c = el_coefficients(u, 0.999 * e.lambda1, 0.5, space);
  CHECK(el_residual(u, c, space) > 1e-2);
}

TEST_CASE("residual grows linearly with a right-hand side perturbation") {
  const FemSpace& space = half_disk_space();
  const MaximizerResult r = maximize_subcritical(space, 0.5, 0.5).best;
  double res[2];
  int k = 0;
  for (double d : {1e-3, 1e-2}) {
    ELCoefficients c = r.coefficients;
    c.gamma_eps += d;
    res[k++] = el_residual(r.u_eps, c, space);
  }
  CHECK(res[0] > 100 * r.el_residual);
  CHECK(res[1] / res[0] == doctest::Approx(10).epsilon(1e-3));
}

TEST_CASE("blow-up profile at the maximum") {
  const FemSpace& space = half_disk_space();
  double prev_r = std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.5, 0.25}) {
    const MaximizerResult r = maximize_subcritical(space, 0, eps).best;
    const BlowupDiagnostics d = blowup_diagnostics(r.u_eps, r.coefficients, space, 2.0);
    CHECK(d.r_eps > 0);
    CHECK(d.c_eps >= 0);
    CHECK(d.r_eps < prev_r);
    prev_r = d.r_eps;
    REQUIRE(d.radial_psi(0).has_value());
    CHECK(*d.radial_psi(0) == 1.0);
    CHECK(*d.radial_phi(0) == 0.0);
    for (const ProfileSample& p : d.profile) CHECK(p.phi <= 1e-12 * d.c_eps * d.c_eps);
    CHECK(d.profile.size() + d.skipped == 1 + 20 * 64);
  }
}

TEST_CASE("retraction lands on the constraint set") {
  const FemSpace space(build_domain(round_spec(Shape::disk, 1, 0.1, "0.2*x1")));
  const Eigen::VectorXd v = retract(random_vector(space.size(), 8), space);
  CHECK(std::abs(weighted_mean(v, space)) <= 1e-12 * space.area());
  CHECK(std::abs(v.dot(space.K() * v) - 1) <= 1e-12);
  CHECK_THROWS_AS(retract(Eigen::VectorXd::Ones(space.size()), space), InvalidArgument);
}

TEST_CASE("resolve_blowup regrades around the maximum and keeps the profile normalized") {
  const Surface base = disk(0.1);
  ResolveOptions ro;
  ro.levels = 1;
  const ResolvedBlowup r = resolve_blowup(base, 0.0, 1.0, ro);
  CHECK(r.r_history.size() == 2);
  CHECK(r.mesh.num_vertices() > base.num_vertices());
  const FemSpace fine(r.mesh);
  CHECK(std::abs(mean(r.best.u_eps, fine)) <= 1e-12 * fine.area());
  CHECK(dirichlet_norm(r.best.u_eps, fine) == doctest::Approx(1).epsilon(1e-12));
  CHECK(r.diagnostics.radial_phi(0.0) == 0.0);
  CHECK(r.diagnostics.radial_psi(0.0) == 1.0);
  // the diagnostics index the regraded mesh
  const int v = nearest_vertex(r.mesh, r.diagnostics.x_eps);
  CHECK(r.diagnostics.x_vertex == v);
  ro.levels = -1;
  CHECK_THROWS_AS(resolve_blowup(base, 0.0, 1.0, ro), InvalidArgument);
}
