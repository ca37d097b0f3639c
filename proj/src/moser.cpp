#include "tmlab/moser.hpp"

#include <cmath>
#include <numbers>

#include "tmlab/errors.hpp"

namespace tmlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Sums over quadrature points for the exponent coefficient a:
//   F = area + sum W (e^{a u^2} - 1),  lam = sum W u^2 e^{a u^2},  mom = sum W u e^{a u^2}
// and optionally the load vector b_i = sum W u e^{a u^2} phi_i.
struct ExpSums {
  double F = 0, lam = 0, mom = 0;
  Eigen::VectorXd b;
  bool tainted = false;
};

ExpSums exp_sums(const Eigen::VectorXd& u, double a, const FemSpace& space, bool want_load) {
  const Eigen::VectorXd uq = space.at_quad_points(u);
  const Eigen::VectorXd& W = space.quad_weights();
  ExpSums s;
  s.F = space.area();  // so that F(0) is the area of the mass matrix exactly
  Eigen::VectorXd wue;
  if (want_load) wue.resize(uq.size());
  for (Eigen::Index q = 0; q < uq.size(); ++q) {
    double x = a * uq[q] * uq[q];
    if (x > kExponentCap) {
      x = kExponentCap;
      s.tainted = true;
    }
    const double we = W[q] * std::exp(x);
    s.F += W[q] * std::expm1(x);
    s.lam += we * uq[q] * uq[q];
    s.mom += we * uq[q];
    if (want_load) wue[q] = we * uq[q];
  }
  if (want_load) s.b = space.load(wue);
  return s;
}

struct Evaluation {
  double F = 0;
  Eigen::VectorXd grad;
  bool tainted = false;
};

Evaluation evaluate(const Eigen::VectorXd& u, double alpha, double beta, const FemSpace& space, bool want_grad) {
  const Eigen::VectorXd Mu = space.M() * u;
  const double s = 1 + alpha * u.dot(Mu);
  const ExpSums e = exp_sums(u, beta * s, space, want_grad);
  Evaluation ev;
  ev.F = e.F;
  ev.tainted = e.tainted;
  if (want_grad) ev.grad = (2 * beta * s) * e.b + (2 * alpha * beta * e.lam) * Mu;
  return ev;
}

double k_norm2(const Eigen::VectorXd& v, const FemSpace& space) { return v.dot(space.K() * v); }

}  // namespace

FunctionalValue functional(const Field& u, double alpha, double beta, const FemSpace& space) {
  space.check(u);
  if (!(beta > 0)) throw InvalidArgument("functional needs beta > 0");
  if (!(alpha >= 0)) throw InvalidArgument("functional needs alpha >= 0");
  const Evaluation ev = evaluate(u.values, alpha, beta, space, false);
  return {ev.F, ev.tainted};
}

Eigen::VectorXd functional_gradient(const Field& u, double alpha, double beta, const FemSpace& space) {
  space.check(u);
  return evaluate(u.values, alpha, beta, space, true).grad;
}

ELCoefficients el_coefficients_beta(const Field& u, double alpha, double beta, const FemSpace& space) {
  space.check(u);
  const double n2 = u.values.dot(space.M() * u.values);
  ELCoefficients c;
  c.alpha_eps = beta * (1 + alpha * n2);
  c.beta_eps = (1 + alpha * n2) / (1 + 2 * alpha * n2);
  c.gamma_eps = alpha / (1 + 2 * alpha * n2);
  const ExpSums e = exp_sums(u.values, c.alpha_eps, space, false);
  c.lambda_eps = e.lam;
  c.mu_eps = c.beta_eps / space.area() * e.mom;
  c.tainted = e.tainted;
  return c;
}

ELCoefficients el_coefficients(const Field& u, double alpha, double eps, const FemSpace& space) {
  return el_coefficients_beta(u, alpha, kTwoPi - eps, space);
}

Eigen::VectorXd el_residual_vector(const Field& u, const ELCoefficients& c, const FemSpace& space) {
  space.check(u);
  const ExpSums e = exp_sums(u.values, c.alpha_eps, space, true);
  return space.K() * u.values - (c.beta_eps / c.lambda_eps) * e.b - c.gamma_eps * (space.M() * u.values) +
         (c.mu_eps / c.lambda_eps) * space.M1();
}

double el_residual(const Field& u, const ELCoefficients& c, const FemSpace& space) {
  const Eigen::VectorXd r = el_residual_vector(u, c, space);
  const Eigen::VectorXd rp = r - (r.sum() / space.area()) * space.M1();
  const Eigen::VectorXd x = space.mean_zero_solver().solve(rp);
  return std::sqrt(std::max(0.0, rp.dot(x)));
}

Eigen::VectorXd retract(const Eigen::VectorXd& u, const FemSpace& space) {
  Eigen::VectorXd v = project_mean_zero(u, space);
  const double n = std::sqrt(k_norm2(v, space));
  if (!(n > 0)) throw InvalidArgument("cannot normalize a field with zero Dirichlet energy");
  v /= n;
  return v;
}

MaximizerResult ascend(const FemSpace& space, double alpha, double beta, Eigen::VectorXd start,
                       const MaximizeOptions& opts, const std::string& seed_name) {
  const MeanZeroSolver& solver = space.mean_zero_solver();
  Eigen::VectorXd u = retract(start, space);
  Evaluation ev = evaluate(u, alpha, beta, space, true);
  MaximizerResult res;
  res.seed = seed_name;
  res.F_initial = ev.F;

  Eigen::VectorXd u_prev, dt_prev;
  double tau = 1.0;
  double stat = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd d = solver.solve(ev.grad);
    const double nu = u.dot(ev.grad);
    const Eigen::VectorXd dt = d - nu * u;
    const double gn2 = k_norm2(dt, space);
    stat = nu > 0 ? std::sqrt(std::max(0.0, gn2)) / nu : std::numeric_limits<double>::infinity();
    if (stat <= opts.tol && !ev.tainted) break;

    if (it > 0) {
      const Eigen::VectorXd s = u - u_prev, y = dt - dt_prev;
      const double sKs = k_norm2(s, space), sKy = s.dot(space.K() * y);
      if (sKy < 0) tau = sKs / -sKy;
      else tau *= 2;
      tau = std::clamp(tau, 1e-14, 1e6);
    } else {
      tau = 0.1 / std::max(1e-300, std::sqrt(gn2));
    }

    bool accepted = false;
    Eigen::VectorXd un;
    Evaluation en;
    for (int k = 0; k < 60; ++k) {
      un = retract(u + tau * dt, space);
      en = evaluate(un, alpha, beta, space, false);
      if (std::isfinite(en.F) && en.F >= ev.F + 1e-4 * tau * gn2 - 1e-14 * std::abs(ev.F)) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;  // line search stalled at round-off level
    u_prev = std::move(u);
    dt_prev = dt;
    u = std::move(un);
    ev = evaluate(u, alpha, beta, space, true);
  }

  res.iterations = it;
  res.u_eps = space.field(u);
  res.F_value = ev.F;
  res.tainted = ev.tainted;
  res.coefficients = el_coefficients_beta(res.u_eps, alpha, beta, space);
  res.el_residual = el_residual(res.u_eps, res.coefficients, space);
  res.converged = !res.tainted && res.el_residual <= opts.tol;
  return res;
}

MaximizerReport maximize_functional(const FemSpace& space, double alpha, double beta, const MaximizeOptions& opts) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  if (!(alpha >= 0)) throw InvalidArgument("alpha must be non-negative");
  MaximizerReport rep;
  const bool need_eigen = opts.eigen_seed || (opts.bubble_seed && opts.bubble_vertex < 0);
  std::optional<Eigenpair> eig = opts.eigen;
  if (!eig && need_eigen) eig = first_eigenpair(space);
  if (eig) rep.lambda1 = eig->lambda1;

  if (opts.eigen_seed)
    rep.seeds.push_back(ascend(space, alpha, beta, eig->u0.values / std::sqrt(eig->lambda1), opts, "eigen"));
  if (opts.bubble_seed) {
    const Surface& s = space.surface();
    int v = opts.bubble_vertex;
    if (v < 0 && eig) {
      const Eigen::VectorXd& u0 = eig->u0.values;
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < s.num_vertices(); ++i)
        if (s.on_boundary[i] && u0[i] > best) {
          best = u0[i];
          v = i;
        }
    }
    if (!is_boundary_vertex(s, v)) throw InvalidArgument("bubble seed vertex must be a boundary vertex");
    const double rho = opts.bubble_radius > 0 ? opts.bubble_radius : 0.1 * std::sqrt(space.area());
    const Eigen::Vector2d c = s.vertex(v);
    Eigen::VectorXd seed(s.num_vertices());
    for (int i = 0; i < s.num_vertices(); ++i) seed[i] = -std::log1p((s.vertex(i) - c).squaredNorm() / (rho * rho));
    rep.seeds.push_back(ascend(space, alpha, beta, seed, opts, "bubble"));
  }
  if (opts.initial) rep.seeds.push_back(ascend(space, alpha, beta, *opts.initial, opts, "initial"));
  if (rep.seeds.empty()) throw InvalidArgument("no ascent seed selected");

  // best: converged beats unconverged, then larger F
  std::size_t best = 0;
  for (std::size_t i = 1; i < rep.seeds.size(); ++i) {
    const auto& a = rep.seeds[i];
    const auto& b = rep.seeds[best];
    if ((a.converged && !b.converged) || (a.converged == b.converged && a.F_value > b.F_value)) best = i;
  }
  rep.best = rep.seeds[best];
  return rep;
}

MaximizerReport maximize_subcritical(const FemSpace& space, double alpha, double eps, const MaximizeOptions& opts) {
  if (!(eps > 0 && eps < kTwoPi)) throw PreconditionViolation("eps must lie in (0, 2 pi)");
  if (!(alpha >= 0)) throw PreconditionViolation("alpha must be non-negative");
  MaximizeOptions o = opts;
  if (!o.eigen) o.eigen = first_eigenpair(space);
  if (alpha >= o.eigen->lambda1)
    throw PreconditionViolation("alpha = " + std::to_string(alpha) + " >= lambda1 = " +
                                std::to_string(o.eigen->lambda1) +
                                ": the supremum is infinite in this range, no maximizer exists");
  return maximize_functional(space, alpha, kTwoPi - eps, o);
}

std::optional<double> BlowupDiagnostics::radial_phi(double radius) const {
  double sum = 0;
  int n = 0;
  for (const auto& p : profile)
    if (std::abs(p.radius - radius) <= 1e-12 * std::max(1.0, radius)) {
      sum += p.phi;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> BlowupDiagnostics::radial_psi(double radius) const {
  double sum = 0;
  int n = 0;
  for (const auto& p : profile)
    if (std::abs(p.radius - radius) <= 1e-12 * std::max(1.0, radius)) {
      sum += p.psi;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

BlowupDiagnostics blowup_diagnostics(const Field& u, const ELCoefficients& c, const FemSpace& space, double R,
                                     const ProfileOptions& opts) {
  space.check(u);
  const Surface& s = space.surface();
  BlowupDiagnostics d;
  Eigen::Index imax = 0;
  u.values.cwiseAbs().maxCoeff(&imax);
  d.x_vertex = static_cast<int>(imax);
  d.x_eps = s.vertex(d.x_vertex);
  d.sign = u.values[imax] < 0 ? -1.0 : 1.0;
  d.c_eps = std::abs(u.values[imax]);
  if (!(d.c_eps > 0)) throw PreconditionViolation("blow-up diagnostics need a nonzero field");
  const double cc = d.c_eps * d.c_eps;
  d.r_eps = std::sqrt(c.lambda_eps / (c.beta_eps * cc * std::exp(std::min(c.alpha_eps * cc, kExponentCap))));

  // sample in the chart where the conformal factor vanishes at x_eps
  d.chart_scale = std::exp(-s.f_nodal[d.x_vertex]);
  d.profile.push_back({0.0, 0.0, 1.0, 0.0});
  const PointLocator loc(s);
  for (int k = 1; k <= opts.radial_samples; ++k) {
    const double rho = R * k / opts.radial_samples;
    for (int j = 0; j < opts.angular_samples; ++j) {
      const double th = 2 * std::numbers::pi * j / opts.angular_samples;
      const Eigen::Vector2d p = d.x_eps + d.r_eps * d.chart_scale * rho * Eigen::Vector2d(std::cos(th), std::sin(th));
      const auto val = loc.interpolate(u.values, p);
      if (!val) {
        ++d.skipped;
        continue;
      }
      const double v = d.sign * *val;
      d.profile.push_back({rho, th, v / d.c_eps, d.c_eps * (v - d.c_eps)});
    }
  }
  return d;
}

ResolvedBlowup resolve_blowup(const Surface& base, double alpha, double eps, const ResolveOptions& opts) {
  if (opts.levels < 0 || !(opts.scale_fraction > 0) || !(opts.grading > 0))
    throw InvalidArgument("resolve_blowup: levels >= 0, positive scale_fraction and grading required");
  std::optional<FemSpace> space;
  space.emplace(base);
  MaximizerResult best = maximize_subcritical(*space, alpha, eps, opts.maximize).best;
  ResolvedBlowup out{base, {}, {}, {}};
  for (int level = 0;; ++level) {
    BlowupDiagnostics d = blowup_diagnostics(best.u_eps, best.coefficients, *space, opts.profile_radius, opts.profile);
    out.r_history.push_back(d.r_eps);
    if (level == opts.levels) {
      out.mesh = space->surface();
      out.best = std::move(best);
      out.diagnostics = std::move(d);
      return out;
    }
    Surface next = refine_graded(base, d.x_eps, opts.scale_fraction * d.r_eps, opts.grading);
    const PointLocator loc(space->surface());
    Eigen::VectorXd start(next.num_vertices());
    for (int i = 0; i < next.num_vertices(); ++i) start[i] = loc.interpolate(best.u_eps.values, next.vertex(i)).value_or(0.0);
    space.emplace(std::move(next));
    MaximizeOptions mo = opts.maximize;
    mo.eigen_seed = false;
    mo.bubble_seed = false;
    mo.eigen.reset();
    mo.initial = std::move(start);
    best = maximize_subcritical(*space, alpha, eps, mo).best;
  }
}

}  // namespace tmlab
