#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/witness.hpp"

using namespace tmlab;
using namespace tmlab::test;

namespace {

constexpr double kPi = std::numbers::pi;

Surface tall_rectangle() { return build_domain(rectangle_spec(2, 1.7, 0.1)); }
const Eigen::Vector2d kSidePoint(0, 0.85);
const std::vector<double> kLadder{1e-2, 1e-4, 1e-6};

// Half-disk adapted around (1,0) for the glued sequence at eps
struct Glued {
  FemSpace space;
  int x0;
  double lambda1;
};

Glued glued_setup(double eps) {
  static const Surface base = refine(half_disk(0.05));
  Surface s = adapted_mesh(base, Eigen::Vector2d(1, 0), eps / 8, eps, 0.15);
  FemSpace space(std::move(s));
  const int x0 = nearest_vertex(space.surface(), {1, 0}, true);
  const double l1 = first_eigenpair(space).lambda1;
  return {std::move(space), x0, l1};
}

}  // namespace

TEST_CASE("bubble vanishes at the origin and is radial and decreasing") {
  CHECK(bubble(0.0, 0.0) == 0.0);
  CHECK(bubble(Eigen::Vector2d(0, 0)) == 0.0);
  double prev = 0;
  for (double r = 0.1; r < 50; r *= 1.7) {
    const double v = bubble_radial(r);
    CHECK(v < prev);
    prev = v;
    for (double th : {0.3, 1.2, 2.5, 4.0})
      CHECK(bubble(r * std::cos(th), r * std::sin(th)) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("finite-difference Laplacian of the bubble at (1,1)") {
  const double h = 1e-4, x = 1, y = 1;
  const double lap = (bubble(x + h, y) + bubble(x - h, y) + bubble(x, y + h) + bubble(x, y - h) - 4 * bubble(x, y)) / (h * h);
  const double rhs = std::exp(4 * kPi * bubble(x, y));
  CHECK(std::abs(-lap - rhs) <= 1e-5 * rhs);
}

TEST_CASE("half-plane mass of the bubble") {
  CHECK(bubble_half_plane_mass(std::sqrt(18 / kPi)) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(std::abs(bubble_mass_quadrature(std::sqrt(18 / kPi)) - 0.9) <= 1e-6);
  for (double rho : {1.0, 5.0, 20.0})
    CHECK(std::abs(bubble_mass_quadrature(rho) - bubble_half_plane_mass(rho)) <= 1e-8);
  CHECK(bubble_half_plane_mass(1e8) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("bubble PDE residual on [-5,5]^2 with h = 1e-3") {
  CHECK(bubble_pde_residual(5, 1e-3) <= 1e-4);
}

TEST_CASE("t_eps = (-log eps)^{-3/8} meets both side conditions on the ladder") {
  for (double eps : kLadder) {
    MoserSequenceParams p;
    p.eps = eps;
    p.t_exponent = 0.375;
    p.t_eps = t_eps(eps, 0.375);
    CHECK(p.t_eps == doctest::Approx(std::pow(-std::log(eps), -0.375)));
    CHECK(p.side_conditions());
  }
}

TEST_CASE("moser sequence is feasible and peaks in the cap") {
  const FemSpace space(tall_rectangle());
  const Eigenpair e = first_eigenpair(space);
  const int x0 = nearest_vertex(space.surface(), kSidePoint, true);
  for (double eps : {1e-2, 1e-3}) {
    const MoserSequence m = moser_sequence(space, e, x0, eps);
    CHECK(std::abs(weighted_mean(m.v_star.values, space)) <= 1e-12 * space.area());
    CHECK(dirichlet_norm(m.v_star, space) <= 1 + 1e-12);
    CHECK(m.params.delta == doctest::Approx(1 / (m.params.t_eps * std::sqrt(-std::log(eps)))));
    CHECK(m.params.u0_x0 > 0);
    Eigen::Index imax;
    m.v_star.values.maxCoeff(&imax);
    const double r = (space.surface().vertex(static_cast<int>(imax)) - space.surface().vertex(x0)).norm();
    CHECK(r <= m.params.delta * std::sqrt(eps) + 1e-12);
  }
}

TEST_CASE("log cap Dirichlet norm tends to 1") {
  const Surface base = tall_rectangle();
  const double eps = 1e-6;
  const Eigen::Vector2d p = base.vertex(nearest_vertex(base, kSidePoint, true));
  const double scale = std::pow(-std::log(eps), 0.3 - 0.5) * std::sqrt(eps);
  const FemSpace space(adapted_mesh(base, p, scale / 8, scale));
  const Eigenpair e = first_eigenpair(space);
  const MoserSequence m = moser_sequence(space, e, nearest_vertex(space.surface(), p, true), eps);
  CHECK(m.params.scale_edges >= 8);
  CHECK(std::abs(m.params.cap_dirichlet - 1) <= 0.05);
}

TEST_CASE("delta ball too large names the admissible eps") {
  const FemSpace space(tall_rectangle());
  const Eigenpair e = first_eigenpair(space);
  const int x0 = nearest_vertex(space.surface(), kSidePoint, true);
  const double emax = max_admissible_eps(space.surface(), x0);
  CHECK(emax > 0);
  CHECK(emax < 0.5);
  try {
    moser_sequence(space, e, x0, 0.5);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& err) {
    CHECK(std::string(err.what()).find("largest admissible eps") != std::string::npos);
  }
  CHECK_NOTHROW(moser_sequence(space, e, x0, 0.9 * emax));
  // corners have no flat half-ball
  CHECK(flat_half_ball_radius(space.surface(), nearest_vertex(space.surface(), {0, 0}, true)) == 0);
}

TEST_CASE("divergence above lambda1 doubles per ladder step") {
  const Surface base = tall_rectangle();
  const double l1 = first_eigenpair(FemSpace(base)).lambda1;
  const DivergenceTable t = divergence_witness(base, 1.1 * l1, kLadder, kSidePoint);
  REQUIRE(t.ratios.size() == 2);
  for (double r : t.ratios) CHECK(r >= 2);
  CHECK(t.doubling);
  for (const DivergenceRow& row : t.rows) {
    CHECK_FALSE(row.tainted);
    CHECK(row.params.scale_edges >= 8);
  }
}

TEST_CASE("no growth at alpha = 0") {
  const DivergenceTable t = divergence_witness(tall_rectangle(), 0, kLadder, kSidePoint);
  for (double r : t.ratios) CHECK(r < 2);
  CHECK(t.max_over_min <= 1.5);
}

TEST_CASE("column is never bounded on three shifted ladders") {
  // bounded means max/min <= 1.5, the alpha = 0 criterion
  const Surface base = tall_rectangle();
  const double l1 = first_eigenpair(FemSpace(base)).lambda1;
  for (double a : {1.0, 1.1})
    for (const std::vector<double>& ladder : {std::vector<double>{1e-2, 1e-4, 1e-6}, {1e-3, 1e-5, 1e-7}, {1e-4, 1e-6, 1e-8}}) {
      const DivergenceTable t = divergence_witness(base, a * l1, ladder, kSidePoint);
      for (double r : t.ratios) CHECK(r > 1);
      CHECK(t.max_over_min > 1.5);
    }
}

TEST_CASE("unresolved concentration scale is a numerical failure without adaptation") {
  WitnessOptions o;
  o.adapt = false;
  CHECK_THROWS_AS(divergence_witness(tall_rectangle(), 0, {1e-4}, kSidePoint, o), NumericalFailure);
  CHECK_THROWS_AS(divergence_witness(tall_rectangle(), 0, {1e-4, 1e-2}, kSidePoint), InvalidArgument);
}

TEST_CASE("glued sequence: matching, b and normalization") {
  const double eps = 1e-4;
  const Glued g = glued_setup(eps);
  const GreenDecomposition gd = green_decomposition(g.space, g.x0, 0, 0.1, 0.2);
  const GluedSequence seq = glued_sequence(g.space, gd, eps);
  const GluedParams& P = seq.params;
  CHECK(P.c1_defect <= 1e-12);
  CHECK(P.R == doctest::Approx(-std::log(eps)));
  CHECK(P.dirichlet_before >= 0.9);
  CHECK(P.dirichlet_before <= 1.1);
  CHECK(std::abs(weighted_mean(seq.v.values, g.space)) <= 1e-12 * g.space.area());
  CHECK(std::abs(dirichlet_norm(seq.v, g.space) - 1) <= 1e-12);

  // nodal jump across r = R eps against the local Lipschitz bound of the branches
  const Surface& s = g.space.surface();
  const Eigen::Vector2d p = s.vertex(g.x0);
  const double scale = std::sqrt(P.c * P.c) * P.dirichlet_before;
  int crossing = 0;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      const int i = s.triangles(t, k), j = s.triangles(t, (k + 1) % 3);
      const double ri = (s.vertex(i) - p).norm(), rj = (s.vertex(j) - p).norm();
      if ((ri - P.r_inner) * (rj - P.r_inner) >= 0) continue;
      ++crossing;
      const double jump = std::abs(seq.v.values[i] - seq.v.values[j]) * scale;
      const double len = (s.vertex(i) - s.vertex(j)).norm();
      CHECK(jump <= 2 / (kPi * std::min(ri, rj)) * len);
    }
  CHECK(crossing > 0);
}

TEST_CASE("b approaches 1/(2 pi)") {
  const double eps = 1e-6;
  const Glued g = glued_setup(eps);
  const GreenDecomposition gd = green_decomposition(g.space, g.x0, 0, 0.1, 0.2);
  const GluedSequence seq = glued_sequence(g.space, gd, eps);
  CHECK(std::abs(seq.params.b - 1 / (2 * kPi)) <= 0.05);
}

TEST_CASE("lower bound constant") {
  CHECK(lower_bound_constant(0, 0) == doctest::Approx(4.2699).epsilon(1e-4));
  CHECK(lower_bound_constant(2.5, 0) - 2.5 == doctest::Approx(kPi / 2 * std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("lower bound holds at alpha = 0, eps = 1e-4") {
  const double eps = 1e-4;
  const Glued g = glued_setup(eps);
  const GreenDecomposition gd = green_decomposition(g.space, g.x0, 0, 0.1, 0.2);
  const LowerBoundCheck lb = lower_bound_check(g.space, gd, 0, eps);
  CHECK(lb.pass);
  CHECK_FALSE(lb.tainted);
  CHECK(lb.F_value > lb.bound);
  CHECK(lb.bound == doctest::Approx(lower_bound_constant(g.space.area(), gd.A_x0)));
  CHECK_THROWS_AS(lower_bound_check(g.space, gd, 0.1, eps), InvalidArgument);
}

TEST_CASE("lower bound value does not drop as eps goes from 1e-4 to 1e-5") {
  double F[2];
  int k = 0;
  for (double eps : {1e-4, 1e-5}) {
    const Glued g = glued_setup(eps);
    const GreenDecomposition gd = green_decomposition(g.space, g.x0, 0, 0.1, 0.2);
    F[k++] = lower_bound_check(g.space, gd, 0, eps).F_value;
  }
  CHECK(F[1] >= F[0] - 1e-3);
}

TEST_CASE("glued sequence refuses a ball leaving the chart") {
  // a point on the arc 0.17 away from the corner (0,1)
  const FemSpace space(refine(half_disk(0.05)));
  const int x0 = nearest_vertex(space.surface(), {std::cos(1.4), std::sin(1.4)}, true);
  CHECK(chart_radius(space.surface(), x0) < 0.3);
  const GreenDecomposition gd = green_decomposition(space, x0, 0, 0.1, 0.2);
  CHECK_THROWS_AS(glued_sequence(space, gd, 0.1), InvalidArgument);
  CHECK_NOTHROW(glued_sequence(space, gd, 1e-3));
}

TEST_CASE("sup ladder grows above 2 pi and settles below") {
  const Surface base = disk(0.1);
  LadderOptions o;
  o.levels = 3;
  const LadderReport above = sup_ladder(base, 0, 2.2 * kPi, {1, 0}, o);
  CHECK(above.grows);
  const LadderReport below = sup_ladder(base, 0, 1.8 * kPi, {1, 0}, o);
  CHECK_FALSE(below.grows);
  CHECK(below.last_change <= 0.05);
  for (const LadderLevel& l : below.levels) CHECK(l.converged);
}
