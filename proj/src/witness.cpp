#include "tmlab/witness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "tmlab/errors.hpp"
#include "tmlab/moser.hpp"

namespace tmlab {

namespace {

constexpr double kPi = std::numbers::pi;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double l2 = ab.squaredNorm();
  const double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

struct BoundaryLinks {
  std::vector<int> next, prev;
};

BoundaryLinks links(const Surface& s) {
  BoundaryLinks l{std::vector<int>(s.num_vertices(), -1), std::vector<int>(s.num_vertices(), -1)};
  for (int e = 0; e < s.boundary_edges.rows(); ++e) {
    l.next[s.boundary_edges(e, 0)] = s.boundary_edges(e, 1);
    l.prev[s.boundary_edges(e, 1)] = s.boundary_edges(e, 0);
  }
  return l;
}

// distance from x0 to the nearest boundary edge with an endpoint outside `keep`
double clearance(const Surface& s, int x0, const std::vector<char>& keep) {
  const Eigen::Vector2d p = s.vertex(x0);
  double r = std::numeric_limits<double>::infinity();
  for (int e = 0; e < s.boundary_edges.rows(); ++e) {
    const int a = s.boundary_edges(e, 0), b = s.boundary_edges(e, 1);
    if (keep[a] && keep[b]) continue;
    r = std::min(r, segment_distance(p, s.vertex(a), s.vertex(b)));
  }
  return r;
}

void require_boundary(const Surface& s, int x0) {
  if (!is_boundary_vertex(s, x0)) throw InvalidArgument("x0 = " + std::to_string(x0) + " is not a boundary vertex");
}

double smooth_bump(double q) { return q < 1 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0; }

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

}  // namespace

double bubble_pde_residual(double half_width, double h) {
  if (!(h > 0) || !(half_width > h)) throw InvalidArgument("bubble_pde_residual needs 0 < h < half_width");
  const int n = static_cast<int>(std::lround(half_width / h));
  // phi is even in both coordinates, so one quadrant of interior nodes suffices
  auto row = [&](int i, std::vector<double>& out) {
    for (int j = 0; j <= n; ++j) out[j] = bubble(std::abs(i) * h, j * h);
  };
  std::vector<double> lo(n + 1), mid(n + 1), hi(n + 1);
  row(-1, lo);
  row(0, mid);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    row(i + 1, hi);
    for (int j = 0; j < n; ++j) {
      const double left = j == 0 ? mid[1] : mid[j - 1];
      const double lap = (lo[j] + hi[j] + left + mid[j + 1] - 4 * mid[j]) / (h * h);
      worst = std::max(worst, std::abs(-lap - std::exp(4 * kPi * mid[j])));
    }
    std::swap(lo, mid);
    std::swap(mid, hi);
  }
  return worst;
}

double bubble_mass_quadrature(double rho, int panels) {
  if (!(rho > 0) || panels < 1) throw InvalidArgument("bubble_mass_quadrature needs rho > 0 and panels >= 1");
  // 8-point Gauss-Legendre on [-1, 1]
  static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static constexpr double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  auto density = [](double r) { return kPi * r * std::exp(4 * kPi * bubble_radial(r)); };
  // panel ends at rho * (k/panels)^2: finer near the peak of the density
  double sum = 0, a = 0;
  for (int k = 1; k <= panels; ++k) {
    const double q = static_cast<double>(k) / panels;
    const double b = rho * q * q;
    const double m = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int j = 0; j < 4; ++j) sum += w[j] * hw * (density(m - hw * x[j]) + density(m + hw * x[j]));
    a = b;
  }
  return sum;
}

double t_eps(double eps, double exponent) {
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("eps must lie in (0, 1)");
  return std::pow(-std::log(eps), -exponent);
}

bool MoserSequenceParams::side_conditions() const {
  const double L = -std::log(eps);
  return t_eps * t_eps * L > 10 && t_eps * t_eps * std::sqrt(L) < 0.1;
}

double flat_half_ball_radius(const Surface& s, int x0) {
  require_boundary(s, x0);
  const BoundaryLinks l = links(s);
  const int a = l.prev[x0], b = l.next[x0];
  if (a < 0 || b < 0) return 0.0;
  const Eigen::Vector2d p = s.vertex(x0);
  const Eigen::Vector2d t = (s.vertex(b) - s.vertex(a)).normalized();
  const double scale = (s.vertex(b) - s.vertex(a)).norm();
  auto on_line = [&](int v) { return std::abs(cross2(s.vertex(v) - p, t)) <= 1e-10 * std::max(scale, 1.0); };
  if (!on_line(a) || !on_line(b)) return 0.0;
  std::vector<char> keep(s.num_vertices(), 0);
  keep[x0] = 1;
  for (int v = b; v >= 0 && !keep[v] && on_line(v); v = l.next[v]) keep[v] = 1;
  for (int v = a; v >= 0 && !keep[v] && on_line(v); v = l.prev[v]) keep[v] = 1;
  return clearance(s, x0, keep);
}

double chart_radius(const Surface& s, int x0) {
  require_boundary(s, x0);
  const BoundaryLinks l = links(s);
  const Eigen::Vector2d p = s.vertex(x0);
  std::vector<char> keep(s.num_vertices(), 0);
  keep[x0] = 1;
  double reach = 0;
  for (const auto* step : {&l.next, &l.prev}) {
    double d = 0;
    for (int v = (*step)[x0]; v >= 0 && !keep[v]; v = (*step)[v]) {
      const double dv = (s.vertex(v) - p).norm();
      if (dv <= d) break;
      keep[v] = 1;
      d = dv;
    }
    reach = std::max(reach, d);
  }
  return std::min(clearance(s, x0, keep), reach);
}

double max_admissible_eps(const Surface& s, int x0, double t_exponent) {
  if (!(t_exponent > 0 && t_exponent < 0.5)) throw InvalidArgument("t exponent must lie in (0, 1/2)");
  const double r = flat_half_ball_radius(s, x0);
  if (!(r > 0)) return 0.0;
  // delta = L^{p - 1/2} < r  <=>  L > r^{-1/(1/2 - p)}
  return std::exp(-std::pow(r, -1.0 / (0.5 - t_exponent)));
}

MoserSequence moser_sequence(const FemSpace& space, const Eigenpair& e, int x0, double eps, double t_exponent) {
  const Surface& s = space.surface();
  require_boundary(s, x0);
  space.check(e.u0);
  if (!(t_exponent > 0 && t_exponent < 0.5)) throw InvalidArgument("t exponent must lie in (0, 1/2)");
  MoserSequenceParams P;
  P.eps = eps;
  P.t_exponent = t_exponent;
  P.t_eps = t_eps(eps, t_exponent);
  P.x0 = x0;
  const double L = -std::log(eps);
  P.delta = 1.0 / (P.t_eps * std::sqrt(L));
  const double r_flat = flat_half_ball_radius(s, x0);
  if (!(P.delta < r_flat))
    throw InvalidArgument("delta = " + fmt(P.delta) + " exceeds the flat half-ball radius " + fmt(r_flat) +
                          " at x0; largest admissible eps is " + fmt(max_admissible_eps(s, x0, t_exponent)));

  const double umax = e.u0.values.cwiseAbs().maxCoeff();
  const double u0x = e.u0.values[x0];
  if (!(std::abs(u0x) > 1e-8 * umax)) throw PreconditionViolation("u0 vanishes at x0");
  P.u0_sign = u0x < 0 ? -1.0 : 1.0;
  P.u0_x0 = std::abs(u0x);

  const Eigen::Vector2d p = s.vertex(x0);
  const int n = s.num_vertices();
  const double r_cap = P.delta * std::sqrt(eps);
  const double plateau = std::sqrt(L / (2 * kPi));
  const double slope = std::sqrt(2.0 / (kPi * L));
  Eigen::VectorXd cap(n);
  for (int i = 0; i < n; ++i) {
    const double r = (s.vertex(i) - p).norm();
    cap[i] = r <= r_cap ? plateau : r <= P.delta ? slope * std::log(P.delta / r) : 0.0;
  }

  // bump: the largest ball clear of the delta-ball and of the boundary
  double best = -1;
  for (int i = 0; i < n; ++i) {
    if (s.on_boundary[i]) continue;
    const Eigen::Vector2d c = s.vertex(i);
    const double room = std::min((c - p).norm() - P.delta, distance_to_boundary(s, c));
    if (room > best) {
      best = room;
      P.bump_center = c;
    }
  }
  P.bump_radius = 0.9 * best;
  if (!(P.bump_radius > 0))
    throw InvalidArgument("no room for the mean-fixing bump outside the delta half-ball; use a smaller eps");
  std::ostringstream sup;
  sup.precision(6);
  sup << "disk centre (" << P.bump_center.x() << ", " << P.bump_center.y() << ") radius " << P.bump_radius;
  P.phi_support = sup.str();
  Eigen::VectorXd bump(n);
  for (int i = 0; i < n; ++i)
    bump[i] = smooth_bump((s.vertex(i) - P.bump_center).squaredNorm() / (P.bump_radius * P.bump_radius));
  const double bump_mass = space.M1().dot(bump);
  if (!(bump_mass > 0)) throw InvalidArgument("the mean-fixing bump is not resolved by the mesh");
  P.s_eps = -space.M1().dot(cap) / bump_mass;

  P.cap_dirichlet = std::sqrt(cap.dot(space.K() * cap));
  Eigen::VectorXd v = cap + P.s_eps * bump + (P.t_eps * P.u0_sign) * e.u0.values;
  v = project_mean_zero(v, space);
  P.v_dirichlet = std::sqrt(v.dot(space.K() * v));
  v /= P.v_dirichlet;
  const double h = local_edge_length(s, p, r_cap);
  P.scale_edges = h > 0 ? r_cap / h : 0.0;
  return {space.field(std::move(v)), P};
}

Surface adapted_mesh(const Surface& base, const Eigen::Vector2d& p, double h_min, double core, double grading,
                     double h_max) {
  if (!(h_min > 0) || !(grading > 0) || !(core >= 0)) throw InvalidArgument("adapted_mesh needs h_min > 0, grading > 0");
  const double cap = h_max > 0 ? h_max : std::numeric_limits<double>::infinity();
  return refine_where(base, p, [=](double d) { return std::min(cap, h_min + grading * std::max(0.0, d - core)); });
}

DivergenceTable divergence_witness(const Surface& base, double alpha, const std::vector<double>& ladder,
                                   const Eigen::Vector2d& x0, const WitnessOptions& opts) {
  if (!(alpha >= 0)) throw InvalidArgument("alpha must be non-negative");
  if (ladder.empty()) throw InvalidArgument("empty eps ladder");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0 && ladder[k] < 1)) throw InvalidArgument("eps must lie in (0, 1)");
    if (k > 0 && !(ladder[k] < ladder[k - 1])) throw InvalidArgument("eps ladder must be decreasing");
  }
  const Eigen::Vector2d p = base.vertex(nearest_vertex(base, x0, true));

  DivergenceTable table;
  table.alpha = alpha;
  table.rows.resize(ladder.size());
  std::vector<std::exception_ptr> errors(ladder.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next++) < ladder.size();) {
      try {
        const double eps = ladder[k];
        const double t = t_eps(eps, opts.t_exponent);
        const double scale = std::sqrt(eps) / (t * std::sqrt(-std::log(eps)));
        Surface s = opts.adapt ? adapted_mesh(base, p, scale / opts.edges_across, scale, opts.grading, opts.h_max)
                               : base;
        const FemSpace space(std::move(s));
        const int v0 = nearest_vertex(space.surface(), p, true);
        const Eigenpair e = first_eigenpair(space);
        const MoserSequence seq = moser_sequence(space, e, v0, eps, opts.t_exponent);
        if (seq.params.scale_edges < opts.edges_across * (1 - 1e-9))
          throw NumericalFailure("delta sqrt(eps) = " + fmt(scale) + " spans only " + fmt(seq.params.scale_edges) +
                                     " edges; refine near x0 (or enable adaptation)",
                                 seq.params.scale_edges);
        const FunctionalValue F = functional(seq.v_star, alpha, 2 * kPi, space);
        DivergenceRow& row = table.rows[k];
        row.eps = eps;
        row.F = F.value;
        row.tainted = F.tainted;
        row.vertices = space.size();
        row.lambda1 = e.lambda1;
        row.params = seq.params;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(ladder.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  double lo = table.rows[0].F, hi = lo;
  table.doubling = table.rows.size() > 1;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const double r = table.rows[k].F / table.rows[k - 1].F;
    table.ratios.push_back(r);
    table.doubling = table.doubling && r >= 2.0;
    lo = std::min(lo, table.rows[k].F);
    hi = std::max(hi, table.rows[k].F);
  }
  table.max_over_min = hi / lo;
  return table;
}

LadderReport sup_ladder(const Surface& base, double alpha, double beta, const Eigen::Vector2d& point,
                        const LadderOptions& opts) {
  if (opts.levels < 1 || !(opts.factor > 1)) throw InvalidArgument("ladder needs levels >= 1 and factor > 1");
  LadderReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  const Eigen::Vector2d p = base.vertex(nearest_vertex(base, point, true));
  const double h0 = local_edge_length(base, p, 0.0);
  std::optional<FemSpace> prev;
  Eigen::VectorXd prev_u;
  for (int lev = 0; lev < opts.levels; ++lev) {
    const double h = h0 / std::pow(opts.factor, lev);
    FemSpace space(lev == 0 ? base : adapted_mesh(base, p, h, 0.0, opts.grading));
    const Surface& s = space.surface();
    MaximizeOptions mo = opts.maximize;
    mo.bubble_vertex = nearest_vertex(s, p, true);
    mo.bubble_radius = opts.bubble_radius * h;
    if (prev) {
      const PointLocator loc(prev->surface());
      Eigen::VectorXd init(s.num_vertices());
      for (int i = 0; i < s.num_vertices(); ++i) init[i] = loc.interpolate(prev_u, s.vertex(i)).value_or(0.0);
      mo.initial = std::move(init);
    }
    const MaximizerReport m = maximize_functional(space, alpha, beta, mo);
    LadderLevel L;
    L.level = lev;
    L.vertices = space.size();
    L.h_local = local_edge_length(s, p, 0.0);
    L.F = m.best.F_value;
    L.converged = m.best.converged;
    L.tainted = m.best.tainted;
    L.el_residual = m.best.el_residual;
    L.seed = m.best.seed;
    rep.levels.push_back(L);
    prev_u = m.best.u_eps.values;
    prev.emplace(space);
  }
  rep.grows = rep.levels.size() > 1;
  for (std::size_t k = 1; k < rep.levels.size(); ++k) {
    const double r = rep.levels[k].F / rep.levels[k - 1].F;
    rep.ratios.push_back(r);
    rep.grows = rep.grows && r >= opts.growth;
  }
  if (!rep.ratios.empty()) rep.last_change = std::abs(rep.ratios.back() - 1.0);
  return rep;
}

GluedSequence glued_sequence(const FemSpace& space, const GreenDecomposition& g, double eps) {
  const Surface& s = space.surface();
  space.check(g.G);
  require_boundary(s, g.x0);
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("eps must lie in (0, 1)");
  GluedParams P;
  P.eps = eps;
  P.R = -std::log(eps);
  P.A = g.A_x0;
  P.alpha = g.alpha;
  P.x0 = g.x0;
  P.r_inner = P.R * eps;
  P.r_outer = 2 * P.R * eps;
  const double room = chart_radius(s, g.x0);
  if (!(P.r_outer < room))
    throw InvalidArgument("2 R eps = " + fmt(P.r_outer) + " leaves the boundary chart of radius " + fmt(room) +
                          " at x0; use a smaller eps");

  const double c2 = P.A - std::log(eps) / kPi + std::log(kPi / 2) / (2 * kPi) - 1 / (2 * kPi);
  if (!(c2 > 0)) throw InvalidArgument("c^2 = " + fmt(c2) + " is not positive; use a smaller eps");
  P.c = std::sqrt(c2);
  const double far = -std::log(P.r_inner) / kPi + P.A;
  const double near_log = std::log1p(kPi / 2 * P.R * P.R) / (2 * kPi);
  P.b = far - c2 + near_log;
  P.c1_defect = std::abs(c2 - near_log + P.b - far);

  const Eigen::VectorXd& G = g.G.values;
  P.G_l2 = std::sqrt(G.dot(space.M() * G));
  const double D = std::sqrt(c2 + P.alpha * P.G_l2 * P.G_l2);
  const Eigen::Vector2d p = s.vertex(g.x0);
  Eigen::VectorXd v(s.num_vertices());
  for (int i = 0; i < s.num_vertices(); ++i) {
    const double r = (s.vertex(i) - p).norm();
    double val;
    if (r <= P.r_inner) {
      val = c2 - std::log1p(kPi / 2 * r * r / (eps * eps)) / (2 * kPi) + P.b;
    } else if (r < P.r_outer) {
      const double xi = (P.r_outer - r) / P.r_inner;
      const double tau = G[i] + std::log(r) / kPi - P.A;
      val = G[i] - xi * tau;
    } else {
      val = G[i];
    }
    v[i] = val / D;
  }
  P.mean_shift = weighted_mean(v, space);
  v.array() -= P.mean_shift;
  P.dirichlet_before = std::sqrt(v.dot(space.K() * v));
  v /= P.dirichlet_before;
  const double h = local_edge_length(s, p, eps);
  P.scale_edges = h > 0 ? eps / h : 0.0;
  return {space.field(std::move(v)), P};
}

double lower_bound_constant(double area, double A) { return area + kPi / 2 * std::exp(1 + 2 * kPi * A); }

LowerBoundCheck lower_bound_check(const FemSpace& space, const GreenDecomposition& g, double alpha, double eps) {
  if (std::abs(alpha - g.alpha) > 1e-12 * std::max(1.0, std::abs(alpha)))
    throw InvalidArgument("alpha = " + fmt(alpha) + " differs from the Green function's alpha = " + fmt(g.alpha));
  LowerBoundCheck out;
  GluedSequence seq = glued_sequence(space, g, eps);
  const FunctionalValue F = functional(seq.v, alpha, 2 * kPi, space);
  out.F_value = F.value;
  out.tainted = F.tainted;
  out.bound = lower_bound_constant(space.area(), g.A_x0);
  out.pass = F.value > out.bound;
  out.params = seq.params;
  return out;
}

}  // namespace tmlab
