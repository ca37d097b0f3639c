#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tmlab/assembly.hpp"
#include "tmlab/green.hpp"
#include "tmlab/moser.hpp"
#include "tmlab/spectrum.hpp"

namespace tmlab {

/// phi(x) = -(1/2pi) log(1 + (pi/2)|x|^2), the entire solution of
/// -Laplace phi = e^{4 pi phi} with phi(0) = 0.
template <typename Scalar>
Scalar bubble(Scalar x1, Scalar x2) {
  using std::log1p;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return -log1p(pi / 2 * (x1 * x1 + x2 * x2)) / (2 * pi);
}

inline double bubble(const Eigen::Vector2d& x) { return bubble(x.x(), x.y()); }

/// Radial form phi(r).
inline double bubble_radial(double r) { return bubble(r, 0.0); }

/// Integral of e^{4 pi phi} over the upper half-disk of radius rho:
/// 1 - 1/(1 + pi rho^2 / 2).
inline double bubble_half_plane_mass(double rho) {
  return 1.0 - 1.0 / (1.0 + std::numbers::pi * rho * rho / 2);
}

/// The same mass by composite Gauss-Legendre quadrature of pi r e^{4 pi phi(r)}
/// on geometrically graded panels in r.
double bubble_mass_quadrature(double rho, int panels = 64);

/// Five-point residual sup |-Laplace_h phi - e^{4 pi phi}| over the grid
/// [-L, L]^2 with spacing h.
double bubble_pde_residual(double half_width, double h);

/// t_eps = (-log eps)^{-exponent}. Both side conditions need exponent in (1/4, 1/2).
double t_eps(double eps, double exponent = 0.3);

/// Radius of the largest ball around boundary vertex x0 whose trace on the
/// boundary is one straight segment through x0 (so the ball meets the domain
/// in an exact half-disk). Zero at corners and on curved arcs.
double flat_half_ball_radius(const Surface& s, int x0);

/// Radius of the largest ball around x0 that meets the boundary in a single
/// arc through x0 (the boundary chain moves away from x0 inside the ball).
double chart_radius(const Surface& s, int x0);

struct MoserSequenceParams {
  double eps = 0;
  double t_exponent = 0.3;
  double t_eps = 0;
  double delta = 0;
  double s_eps = 0;
  int x0 = -1;
  double u0_sign = 1;  // -1 when u0 was flipped to make u0(x0) > 0
  double u0_x0 = 0;    // u0(x0) after the flip
  Eigen::Vector2d bump_center = Eigen::Vector2d::Zero();
  double bump_radius = 0;
  std::string phi_support;
  double cap_dirichlet = 0;  // ||grad u_tilde_eps|| of the interpolated log cap
  double v_dirichlet = 0;    // ||grad v_eps|| before normalization
  double scale_edges = 0;    // delta sqrt(eps) / local edge length

  /// t^2 (-log eps) > 10 and t^2 sqrt(-log eps) < 0.1.
  bool side_conditions() const;
};

struct MoserSequence {
  Field v_star;
  MoserSequenceParams params;
};

/// The test sequence for alpha >= lambda1: a log cap of height
/// sqrt(-log eps / 2pi) in the delta half-ball around x0, a bump s_eps phi
/// outside it fixing the mean, plus t_eps u0; normalized to unit Dirichlet
/// norm. Throws InvalidArgument when the half-ball does not fit (the message
/// names the largest admissible eps) and PreconditionViolation if u0(x0) = 0.
MoserSequence moser_sequence(const FemSpace& space, const Eigenpair& e, int x0, double eps,
                             double t_exponent = 0.3);

/// Largest eps for which the delta half-ball around x0 fits.
double max_admissible_eps(const Surface& s, int x0, double t_exponent = 0.3);

struct WitnessOptions {
  double t_exponent = 0.3;
  bool adapt = true;           // graded refinement around x0 per ladder entry
  double edges_across = 8;     // smallest construction scale / local edge length
  double grading = 0.15;
  double h_max = 0;            // 0: keep the base mesh size away from x0
  int jobs = 1;
};

struct DivergenceRow {
  double eps = 0;
  double F = 0;
  bool tainted = false;
  int vertices = 0;
  double lambda1 = 0;
  MoserSequenceParams params;
};

struct DivergenceTable {
  double alpha = 0;
  std::vector<DivergenceRow> rows;
  std::vector<double> ratios;  // F_{k+1} / F_k
  bool doubling = false;       // every ratio >= 2
  double max_over_min = 0;
};

/// F_alpha^{2pi}(v*_eps) along a decreasing eps ladder. With `adapt` each
/// entry gets its own mesh refined towards x0 until delta sqrt(eps) spans
/// `edges_across` edges; without it an unresolved scale is a
/// NumericalFailure. x0 is the boundary vertex of `base` nearest the point.
DivergenceTable divergence_witness(const Surface& base, double alpha, const std::vector<double>& ladder,
                                   const Eigen::Vector2d& x0, const WitnessOptions& opts = {});

/// Mesh refined so that triangles within `core` of p have edges <= h_min,
/// growing like h_min + grading (d - core) further out (capped by h_max > 0).
Surface adapted_mesh(const Surface& base, const Eigen::Vector2d& p, double h_min, double core,
                     double grading = 0.15, double h_max = 0);

struct LadderOptions {
  int levels = 4;          // level 0 is the base mesh
  double factor = 32;      // local edge length shrinks by this per level
  double grading = 0.15;
  double bubble_radius = 3;  // bubble seed radius in local edge lengths
  double growth = 1.5;       // ratio that counts as growth
  MaximizeOptions maximize;  // tol, iteration cap, seed switches
};

struct LadderLevel {
  int level = 0;
  int vertices = 0;
  double h_local = 0;
  double F = 0;
  bool converged = false;
  bool tainted = false;
  double el_residual = 0;
  std::string seed;
};

struct LadderReport {
  double alpha = 0, beta = 0;
  std::vector<LadderLevel> levels;
  std::vector<double> ratios;
  bool grows = false;        // every ratio >= growth
  double last_change = 0;    // |F_last / F_prev - 1|
};

/// Discrete sup of F_alpha^beta on meshes refined ever more strongly towards
/// the boundary point, each level warm-started from the previous maximizer
/// and from a bubble at the point. No threshold checks on alpha or beta.
LadderReport sup_ladder(const Surface& base, double alpha, double beta, const Eigen::Vector2d& point,
                        const LadderOptions& opts = {});

struct GluedParams {
  double eps = 0;
  double R = 0;  // -log eps
  double b = 0;
  double c = 0;
  double A = 0;
  double alpha = 0;
  double G_l2 = 0;  // ||G||_2
  int x0 = -1;
  double r_inner = 0, r_outer = 0;  // R eps, 2 R eps
  double c1_defect = 0;  // |c^2 - log(1 + pi R^2/2)/2pi + b + log(R eps)/pi - A|
  double dirichlet_before = 0;  // ||grad v_eps|| before the exact rescale
  double mean_shift = 0;        // weighted mean removed
  double scale_edges = 0;       // eps / local edge length
};

struct GluedSequence {
  Field v;  // mean zero, unit Dirichlet norm
  GluedParams params;
};

/// The concentrating sequence built from the Green function: the bubble
/// c^2 - log(1 + (pi/2)|x - x0|^2 / eps^2)/2pi + b inside R eps, G - xi tau
/// on the ramp, G outside, all over sqrt(c^2 + alpha ||G||^2). Uses the alpha
/// stored in g. Throws InvalidArgument when 2 R eps leaves the chart.
GluedSequence glued_sequence(const FemSpace& space, const GreenDecomposition& g, double eps);

struct LowerBoundCheck {
  double F_value = 0;
  double bound = 0;  // area + (pi/2) e^{1 + 2 pi A}
  bool pass = false;
  bool tainted = false;
  GluedParams params;
};

double lower_bound_constant(double area, double A);

/// F_alpha^{2pi} of the glued field against area + (pi/2) e^{1 + 2 pi A}.
/// alpha must match the Green decomposition's alpha.
LowerBoundCheck lower_bound_check(const FemSpace& space, const GreenDecomposition& g, double alpha, double eps);

}  // namespace tmlab
