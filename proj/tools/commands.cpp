#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <numeric>
#include <thread>

#include "run_record.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/green.hpp"
#include "tmlab/io.hpp"
#include "tmlab/moser.hpp"
#include "tmlab/spectrum.hpp"
#include "tmlab/witness.hpp"

namespace tmlab::cli {

using nlohmann::json;

namespace {

Surface load_mesh(const std::string& path, RunRecord& rec) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
  Surface s = mesh_from_json(j);
  rec.inputs[path] = content_hash(text);
  if (rec.mesh_hash.empty()) rec.mesh_hash = hex64(s.id);
  return s;
}

AssemblyOptions assembly(const Common& c) {
  AssemblyOptions a;
  if (c.jobs > 1) {
    a.reduction = Reduction::parallel;
    a.jobs = c.jobs;
  }
  return a;
}

void finish(RunRecord& rec, const Common& c, const Stopwatch& clock) {
  if (!c.deterministic) rec.wall_time = clock.seconds();
}

void declare_output(RunRecord& rec, const std::string& path) {
  if (path.empty()) return;
  check_output_path(path);
  rec.outputs.push_back(path);
}

json alpha_json(const AlphaChoice& a) {
  json j;
  j["alpha"] = a.alpha ? json(*a.alpha) : json(nullptr);
  j["alpha_rel"] = a.alpha_rel ? json(*a.alpha_rel) : json(nullptr);
  return j;
}

void check_alpha_choice(const AlphaChoice& a) {
  if (a.alpha && a.alpha_rel) throw InvalidArgument("give either --alpha or --alpha-rel, not both");
  if (a.alpha && !(*a.alpha >= 0)) throw InvalidArgument("--alpha must be non-negative");
  if (a.alpha_rel && !(*a.alpha_rel >= 0)) throw InvalidArgument("--alpha-rel must be non-negative");
}

// lambda1 is computed lazily: only when alpha is relative or must be checked
class Lambda1 {
 public:
  explicit Lambda1(const FemSpace& space) : space_(space) {}
  const Eigenpair& pair() {
    if (!e_) e_ = first_eigenpair(space_);
    return *e_;
  }
  double value() { return pair().lambda1; }
  bool known() const { return e_.has_value(); }

 private:
  const FemSpace& space_;
  std::optional<Eigenpair> e_;
};

double resolve_alpha(const AlphaChoice& a, Lambda1& l1) {
  if (a.alpha_rel) return *a.alpha_rel * l1.value();
  return a.alpha.value_or(0.0);
}

FitModel fit_model(const std::string& name) {
  if (name == "constant") return FitModel::constant;
  if (name == "affine") return FitModel::affine;
  if (name == "quadratic") return FitModel::quadratic;
  throw InvalidArgument("unknown fit model '" + name + "' (constant, affine, quadratic)");
}

const char* fit_name(FitModel m) {
  switch (m) {
    case FitModel::constant: return "constant";
    case FitModel::affine: return "affine";
    case FitModel::quadratic: return "quadratic";
  }
  return "?";
}

Eigen::Vector2d point_of(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw InvalidArgument(std::string(flag) + " expects two numbers x,y");
  return {v[0], v[1]};
}

json point_json(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

std::string field_document(const RunRecord& rec, const Field& u, const std::string& name) {
  return json_document(rec, field_to_json(u, name));
}

json result_json(const MaximizerResult& r, const FemSpace& space) {
  json j;
  j["seed"] = r.seed;
  j["F_value"] = r.F_value;
  j["F_initial"] = r.F_initial;
  j["el_residual"] = r.el_residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["tainted"] = r.tainted;
  j["mean"] = mean(r.u_eps, space);
  j["dirichlet_norm"] = dirichlet_norm(r.u_eps, space);
  j["sup_abs"] = r.u_eps.values.cwiseAbs().maxCoeff();
  const auto& c = r.coefficients;
  j["coefficients"] = {{"alpha_eps", c.alpha_eps}, {"beta_eps", c.beta_eps}, {"gamma_eps", c.gamma_eps},
                       {"lambda_eps", c.lambda_eps}, {"mu_eps", c.mu_eps}};
  return j;
}

json moser_params_json(const MoserSequenceParams& p) {
  json j;
  j["eps"] = p.eps;
  j["t_exponent"] = p.t_exponent;
  j["t_eps"] = p.t_eps;
  j["delta"] = p.delta;
  j["s_eps"] = p.s_eps;
  j["x0"] = p.x0;
  j["u0_x0"] = p.u0_x0;
  j["u0_sign"] = p.u0_sign;
  j["phi_support"] = p.phi_support;
  j["cap_dirichlet"] = p.cap_dirichlet;
  j["v_dirichlet"] = p.v_dirichlet;
  j["scale_edges"] = p.scale_edges;
  j["side_conditions"] = p.side_conditions();
  return j;
}

json glued_params_json(const GluedParams& p) {
  json j;
  j["eps"] = p.eps;
  j["R"] = p.R;
  j["b"] = p.b;
  j["c"] = p.c;
  j["A"] = p.A;
  j["alpha"] = p.alpha;
  j["G_l2"] = p.G_l2;
  j["x0"] = p.x0;
  j["cutoff_radii"] = {p.r_inner, p.r_outer};
  j["c1_defect"] = p.c1_defect;
  j["dirichlet_before"] = p.dirichlet_before;
  j["mean_shift"] = p.mean_shift;
  j["scale_edges"] = p.scale_edges;
  return j;
}

json fit_json(const FitReport& f) {
  json j;
  j["annulus"] = {f.r_inner, f.r_outer};
  j["vertices"] = f.vertices;
  j["rms"] = f.rms;
  j["model"] = fit_name(f.model);
  j["coefficients"] = f.coefficients;
  return j;
}

// boundary vertex for the Moser sequence: inside {u0 >= max u0 / 2}, the one
// with the widest flat half-ball
int default_moser_x0(const Surface& s, const Eigenpair& e) {
  const auto bv = boundary_vertices(s);
  double umax = 0;
  for (int v : bv) umax = std::max(umax, std::abs(e.u0.values[v]));
  int best = -1;
  double best_r = -1, best_u = -1;
  for (int v : bv) {
    const double u = e.u0.values[v];  // sign-normalized: the boundary max is positive
    if (u < 0.5 * umax) continue;
    const double r = flat_half_ball_radius(s, v);
    if (r > best_r || (r == best_r && u > best_u)) {
      best = v;
      best_r = r;
      best_u = u;
    }
  }
  if (best < 0 || !(best_r > 0)) throw InvalidArgument("no straight boundary piece where u0 is large; pass --x0");
  return best;
}

}  // namespace

int run_mesh(const MeshOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "mesh";
  rec.parameters = {{"shape", o.shape},   {"radius", o.radius},   {"width", o.width},    {"height", o.height},
                    {"angle", o.angle},   {"h", o.h},             {"f", o.f},            {"refine", o.refine},
                    {"times", o.times},   {"graded", o.graded},   {"h_min", o.h_min},    {"grading", o.grading}};
  if (o.shape.empty() == o.refine.empty()) throw InvalidArgument("give exactly one of --shape or --refine");
  if (o.times < 0) throw InvalidArgument("--times must be non-negative");
  if (!o.graded.empty() && !(o.h_min > 0)) throw InvalidArgument("--graded needs --h-min > 0");
  declare_output(rec, o.out);

  Surface s;
  if (!o.shape.empty()) {
    DomainSpec d;
    d.shape = shape_from_string(o.shape);
    d.radius = o.radius;
    d.width = o.width;
    d.height = o.height;
    d.angle = o.angle;
    d.target_edge_length = o.h;
    d.conformal_factor = Expression(o.f);
    d.validate();
    s = build_domain(d);
  } else {
    s = load_mesh(o.refine, rec);
    for (int k = 0; k < o.times; ++k) s = refine(s);
  }
  if (!o.graded.empty()) s = refine_graded(s, point_of(o.graded, "--graded"), o.h_min, o.grading);

  json payload = mesh_to_json(s);
  payload["surface_id"] = hex64(s.id);
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, payload));
  out.commit();
  std::cout << "vertices " << s.num_vertices() << " triangles " << s.num_triangles() << " area "
            << real(area(s)) << "\n";
  return 0;
}

int run_eigen(const EigenCmdOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "eigen";
  rec.parameters = {{"mesh", o.mesh}, {"tol", o.tol}, {"block", o.block}, {"seed", o.seed}, {"field", o.field}};
  if (!(o.tol > 0)) throw InvalidArgument("--tol must be positive");
  if (o.block < 1) throw InvalidArgument("--block must be >= 1");
  declare_output(rec, o.out);
  declare_output(rec, o.field);
  const FemSpace space(load_mesh(o.mesh, rec), assembly(c));

  EigenOptions eo;
  eo.block = o.block;
  eo.seed = o.seed;
  const Eigenpair e = first_eigenpair(space, o.tol, eo);
  json r;
  r["lambda1"] = e.lambda1;
  r["residual"] = e.rayleigh_residual;
  r["iterations"] = e.iterations;
  r["multiplicity"] = e.multiplicity;
  r["ritz"] = e.ritz;
  r["vertices"] = space.size();
  r["area"] = space.area();
  r["u0_file"] = o.field.empty() ? json(nullptr) : json(o.field);
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.field.empty()) out.add(o.field, field_document(rec, e.u0, "u0"));
  out.commit();
  std::cout << "lambda1 " << real(e.lambda1) << " residual " << real(e.rayleigh_residual) << "\n";
  return 0;
}

int run_maximize(const MaximizeCmdOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "maximize";
  rec.parameters = {{"mesh", o.mesh},
                    {"eps", o.eps},
                    {"eigen_seed", o.eigen_seed},
                    {"bubble_seed", o.bubble_seed},
                    {"bubble_vertex", o.bubble_vertex},
                    {"bubble_radius", o.bubble_radius},
                    {"tol", o.tol},
                    {"max_iter", o.max_iter},
                    {"profile_radius", o.profile_radius},
                    {"resolve_levels", o.resolve_levels},
                    {"resolved_mesh", o.resolved_mesh},
                    {"field", o.field},
                    {"plot", o.plot}};
  rec.parameters.update(alpha_json(o.alpha));
  check_alpha_choice(o.alpha);
  if (!(o.tol > 0) || o.max_iter < 1) throw InvalidArgument("--tol must be positive and --max-iter >= 1");
  if (!o.eigen_seed && !o.bubble_seed) throw InvalidArgument("at least one seed is needed");
  if (!(o.profile_radius >= 0)) throw InvalidArgument("--profile-radius must be non-negative");
  if (!o.plot.empty() && !(o.profile_radius > 0)) throw InvalidArgument("--plot needs --profile-radius");
  if (o.resolve_levels < 0) throw InvalidArgument("--resolve-levels must be non-negative");
  if (!o.resolved_mesh.empty() && o.resolve_levels == 0) throw InvalidArgument("--resolved-mesh needs --resolve-levels");
  declare_output(rec, o.out);
  declare_output(rec, o.field);
  declare_output(rec, o.plot);
  declare_output(rec, o.resolved_mesh);
  const FemSpace space(load_mesh(o.mesh, rec), assembly(c));
  if (o.bubble_vertex >= space.size()) throw InvalidArgument("--bubble-vertex out of range");

  Lambda1 l1(space);
  const double alpha = resolve_alpha(o.alpha, l1);
  MaximizeOptions mo;
  mo.tol = o.tol;
  mo.max_iterations = o.max_iter;
  mo.eigen_seed = o.eigen_seed;
  mo.bubble_seed = o.bubble_seed;
  mo.bubble_vertex = o.bubble_vertex;
  mo.bubble_radius = o.bubble_radius;
  if (l1.known()) mo.eigen = l1.pair();
  const MaximizerReport rep = maximize_subcritical(space, alpha, o.eps, mo);

  json r;
  r["alpha"] = alpha;
  r["eps"] = o.eps;
  r["beta"] = 2 * std::numbers::pi - o.eps;
  r["lambda1"] = rep.lambda1;
  r["area"] = space.area();
  r["best"] = result_json(rep.best, space);
  json seeds = json::array();
  for (const auto& s : rep.seeds) seeds.push_back(result_json(s, space));
  r["seeds"] = seeds;
  r["converged"] = rep.best.converged;
  // with --resolve-levels the field, profile and plot refer to the regraded mesh
  std::optional<ResolvedBlowup> res;
  if (o.resolve_levels > 0) {
    ResolveOptions ro;
    ro.levels = o.resolve_levels;
    ro.profile_radius = o.profile_radius > 0 ? o.profile_radius : 1.0;
    ro.maximize = mo;
    res = resolve_blowup(space.surface(), alpha, o.eps, ro);
    const FemSpace fine(res->mesh, assembly(c));
    json jr;
    jr["levels"] = o.resolve_levels;
    jr["vertices"] = fine.size();
    jr["surface_id"] = hex64(res->mesh.id);
    jr["r_history"] = res->r_history;
    jr["best"] = result_json(res->best, fine);
    r["resolved"] = jr;
  }
  std::vector<double> px, py;
  if (o.profile_radius > 0) {
    const BlowupDiagnostics d =
        res ? res->diagnostics
            : blowup_diagnostics(rep.best.u_eps, rep.best.coefficients, space, o.profile_radius);
    json b;
    b["c_eps"] = d.c_eps;
    b["r_eps"] = d.r_eps;
    b["x_eps"] = point_json(d.x_eps);
    b["x_vertex"] = d.x_vertex;
    b["sign"] = d.sign;
    b["chart_scale"] = d.chart_scale;
    b["skipped"] = d.skipped;
    json radial = json::array();
    std::vector<double> radii;
    for (const auto& smp : d.profile)
      if (radii.empty() || smp.radius != radii.back()) radii.push_back(smp.radius);
    for (double rr : radii) {
      const auto phi = d.radial_phi(rr);
      const auto psi = d.radial_psi(rr);
      radial.push_back({{"radius", rr},
                        {"phi", phi ? json(*phi) : json(nullptr)},
                        {"psi", psi ? json(*psi) : json(nullptr)},
                        {"bubble", bubble_radial(rr)}});
      if (phi) {
        px.push_back(rr);
        py.push_back(*phi);
      }
    }
    b["radial"] = radial;
    r["blowup"] = b;
  }
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.field.empty()) out.add(o.field, field_document(rec, res ? res->best.u_eps : rep.best.u_eps, "u_eps"));
  if (!o.plot.empty()) out.add(o.plot, plot_document(rec, "radius", "phi_eps", px, py));
  if (res && !o.resolved_mesh.empty()) out.add(o.resolved_mesh, json_document(rec, mesh_to_json(res->mesh)));
  out.commit();
  std::cout << "F " << real(rep.best.F_value) << " converged " << rep.best.converged << " seed " << rep.best.seed
            << "\n";
  return 0;
}

int run_sweep(const SweepOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "sweep";
  rec.parameters = {{"mesh", o.mesh},     {"alpha", o.alphas},     {"alpha_rel", o.alphas_rel}, {"eps", o.eps},
                    {"levels", o.levels}, {"factor", o.factor},   {"grading", o.grading},      {"growth", o.growth},
                    {"point", o.point}};
  if (o.alphas.empty() && o.alphas_rel.empty()) throw InvalidArgument("give --alpha and/or --alpha-rel values");
  if (!(o.eps > 0 && o.eps < 2 * std::numbers::pi)) throw InvalidArgument("--eps must lie in (0, 2 pi)");
  if (o.levels < 2 || !(o.factor > 1)) throw InvalidArgument("--levels >= 2 and --factor > 1 are required");
  for (double a : o.alphas)
    if (!(a >= 0)) throw InvalidArgument("alpha values must be non-negative");
  for (double a : o.alphas_rel)
    if (!(a >= 0)) throw InvalidArgument("alpha-rel values must be non-negative");
  declare_output(rec, o.out);
  const Surface base = load_mesh(o.mesh, rec);
  const FemSpace space(base, assembly(c));
  const Eigenpair e = first_eigenpair(space);
  Eigen::Vector2d point;
  if (!o.point.empty()) {
    point = point_of(o.point, "--point");
  } else {
    int best = -1;
    for (int v : boundary_vertices(base))
      if (best < 0 || e.u0.values[v] > e.u0.values[best]) best = v;
    point = base.vertex(best);
  }

  struct Cell {
    double alpha, rel;
  };
  std::vector<Cell> cells;
  for (double a : o.alphas) cells.push_back({a, a / e.lambda1});
  for (double r : o.alphas_rel) cells.push_back({r * e.lambda1, r});
  LadderOptions lo;
  lo.levels = o.levels;
  lo.factor = o.factor;
  lo.grading = o.grading;
  lo.growth = o.growth;
  std::vector<LadderReport> reports(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next++) < cells.size();) {
      try {
        reports[k] = sup_ladder(base, cells[k].alpha, 2 * std::numbers::pi - o.eps, point, lo);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  finish(rec, c, clock);
  std::string csv = "# format_version " + std::to_string(kFormatVersion) + "\n";
  csv += "# run_record " + canonical_dump(rec.to_json(), 0);
  csv += "# lambda1 " + real(e.lambda1) + " point " + real(point.x()) + " " + real(point.y()) + "\n";
  csv += "alpha,alpha_over_lambda1,level,vertices,h_local,F,ratio,converged,tainted,el_residual,growth\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const LadderReport& r = reports[k];
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const LadderLevel& L = r.levels[l];
      csv += real(cells[k].alpha) + "," + real(cells[k].rel) + "," + std::to_string(L.level) + "," +
             std::to_string(L.vertices) + "," + real(L.h_local) + "," + real(L.F) + "," +
             (l == 0 ? std::string("") : real(r.ratios[l - 1])) + "," + (L.converged ? "true" : "false") + "," +
             (L.tainted ? "true" : "false") + "," + real(L.el_residual) + "," + (r.grows ? "true" : "false") + "\n";
    }
  }
  OutputSet out;
  out.add(o.out, csv);
  out.commit();
  for (std::size_t k = 0; k < cells.size(); ++k)
    std::cout << "alpha/lambda1 " << real(cells[k].rel) << " growth " << (reports[k].grows ? "true" : "false")
              << "\n";
  return 0;
}

namespace {

int witness_bubble(const WitnessCmdOptions& o, const Common& c, RunRecord& rec, const Stopwatch& clock) {
  if (!(o.rmax > 0) || o.samples < 2) throw InvalidArgument("--rmax > 0 and --samples >= 2 are required");
  if (!(o.fd_h > 0) || !(o.fd_half_width > o.fd_h)) throw InvalidArgument("need 0 < --fd-h < --fd-half-width");
  std::vector<double> x(o.samples), y(o.samples);
  for (int i = 0; i < o.samples; ++i) {
    x[i] = o.rmax * i / (o.samples - 1);
    y[i] = bubble_radial(x[i]);
  }
  json r;
  r["phi0"] = bubble(0.0, 0.0);
  r["pde_residual"] = {{"h", o.fd_h}, {"half_width", o.fd_half_width},
                       {"sup", bubble_pde_residual(o.fd_half_width, o.fd_h)}};
  json mass = json::array();
  for (double rho : {1.0, 5.0, 20.0})
    mass.push_back({{"rho", rho}, {"closed_form", bubble_half_plane_mass(rho)},
                    {"quadrature", bubble_mass_quadrature(rho)}});
  r["half_plane_mass"] = mass;
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.plot.empty()) out.add(o.plot, plot_document(rec, "r", "phi", x, y));
  out.commit();
  std::cout << "pde residual " << real(r["pde_residual"]["sup"].get<double>()) << "\n";
  return 0;
}

int witness_moser(const WitnessCmdOptions& o, const Common& c, RunRecord& rec, const Stopwatch& clock) {
  if (o.mesh.empty()) throw InvalidArgument("--mesh is required");
  if (o.ladder.empty()) throw InvalidArgument("--ladder is empty");
  const Surface base = load_mesh(o.mesh, rec);
  const FemSpace space(base, assembly(c));
  const Eigenpair e = first_eigenpair(space);
  const double alpha = o.alpha.alpha_rel ? *o.alpha.alpha_rel * e.lambda1 : o.alpha.alpha.value_or(0.0);
  const Eigen::Vector2d x0 = o.x0.empty() ? base.vertex(default_moser_x0(base, e)) : point_of(o.x0, "--x0");
  WitnessOptions wo;
  wo.t_exponent = o.t_exponent;
  wo.adapt = o.adapt;
  wo.edges_across = o.edges_across;
  wo.grading = o.grading;
  wo.jobs = c.jobs;
  const DivergenceTable t = divergence_witness(base, alpha, o.ladder, x0, wo);
  json r;
  r["alpha"] = alpha;
  r["lambda1"] = e.lambda1;
  r["alpha_over_lambda1"] = alpha / e.lambda1;
  r["x0"] = point_json(base.vertex(nearest_vertex(base, x0, true)));
  json rows = json::array();
  std::vector<double> px, py;
  for (const auto& row : t.rows) {
    rows.push_back({{"eps", row.eps},
                    {"F", row.F},
                    {"tainted", row.tainted},
                    {"vertices", row.vertices},
                    {"lambda1", row.lambda1},
                    {"params", moser_params_json(row.params)}});
    px.push_back(row.eps);
    py.push_back(row.F);
  }
  r["rows"] = rows;
  r["ratios"] = t.ratios;
  r["doubling"] = t.doubling;
  r["max_over_min"] = t.max_over_min;
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.plot.empty()) out.add(o.plot, plot_document(rec, "eps", "F", px, py));
  out.commit();
  std::cout << "doubling " << (t.doubling ? "true" : "false") << " max/min " << real(t.max_over_min) << "\n";
  return 0;
}

int witness_glued(const WitnessCmdOptions& o, const Common& c, RunRecord& rec, const Stopwatch& clock) {
  if (o.mesh.empty()) throw InvalidArgument("--mesh is required");
  if (o.x0.empty()) throw InvalidArgument("--x0 is required for the glued sequence");
  if (o.annulus.size() != 2 || !(o.annulus[0] > 0) || !(o.annulus[1] > o.annulus[0]))
    throw InvalidArgument("--annulus expects inner,outer with 0 < inner < outer");
  if (!(o.eps > 0 && o.eps < 1)) throw InvalidArgument("--eps must lie in (0, 1)");
  const FitModel model = fit_model(o.fit_model);
  Surface s = load_mesh(o.mesh, rec);
  const Eigen::Vector2d p = s.vertex(nearest_vertex(s, point_of(o.x0, "--x0"), true));
  if (o.adapt) s = adapted_mesh(s, p, o.eps / o.edges_across, o.eps, o.grading);
  const FemSpace space(std::move(s), assembly(c));
  const int x0 = nearest_vertex(space.surface(), p, true);
  Lambda1 l1(space);
  const double alpha = resolve_alpha(o.alpha, l1);
  std::optional<double> lam;
  if (alpha > 0) lam = l1.value();
  const GreenDecomposition g = green_decomposition(space, x0, alpha, o.annulus[0], o.annulus[1], model, lam);
  const LowerBoundCheck lb = lower_bound_check(space, g, alpha, o.eps);
  const GluedSequence seq = glued_sequence(space, g, o.eps);

  json r;
  r["alpha"] = alpha;
  r["lambda1"] = lam ? json(*lam) : json(nullptr);
  r["x0"] = point_json(p);
  r["vertices"] = space.size();
  r["area"] = space.area();
  r["A"] = g.A_x0;
  r["fit"] = fit_json(g.fit_report);
  r["green_residual"] = g.residual;
  r["params"] = glued_params_json(lb.params);
  r["b"] = lb.params.b;
  r["c"] = lb.params.c;
  r["b_minus_1_over_2pi"] = lb.params.b - 1 / (2 * std::numbers::pi);
  r["F_value"] = lb.F_value;
  r["bound"] = lb.bound;
  r["pass"] = lb.pass;
  r["tainted"] = lb.tainted;
  r["mean"] = mean(seq.v, space);
  r["dirichlet_norm"] = dirichlet_norm(seq.v, space);
  std::vector<int> order(space.size());
  std::iota(order.begin(), order.end(), 0);
  const Surface& ms = space.surface();
  std::vector<double> rad(space.size());
  for (int i = 0; i < space.size(); ++i) rad[i] = (ms.vertex(i) - p).norm();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rad[a] < rad[b]; });
  std::vector<double> px, py;
  for (int i : order) {
    px.push_back(rad[i]);
    py.push_back(seq.v.values[i]);
  }
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.field.empty()) out.add(o.field, field_document(rec, seq.v, "glued"));
  if (!o.plot.empty()) out.add(o.plot, plot_document(rec, "distance_to_x0", "v", px, py));
  out.commit();
  std::cout << "F " << real(lb.F_value) << " bound " << real(lb.bound) << " pass " << (lb.pass ? "true" : "false")
            << "\n";
  return 0;
}

}  // namespace

int run_witness(const WitnessCmdOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "witness " + o.kind;
  rec.parameters = {{"kind", o.kind},
                    {"mesh", o.mesh},
                    {"rmax", o.rmax},
                    {"samples", o.samples},
                    {"fd_h", o.fd_h},
                    {"fd_half_width", o.fd_half_width},
                    {"ladder", o.ladder},
                    {"t_exponent", o.t_exponent},
                    {"adapt", o.adapt},
                    {"edges_across", o.edges_across},
                    {"grading", o.grading},
                    {"eps", o.eps},
                    {"annulus", o.annulus},
                    {"fit_model", o.fit_model},
                    {"x0", o.x0},
                    {"field", o.field},
                    {"plot", o.plot}};
  rec.parameters.update(alpha_json(o.alpha));
  check_alpha_choice(o.alpha);
  if (!(o.edges_across > 0) || !(o.grading > 0)) throw InvalidArgument("--edges-across and --grading must be positive");
  declare_output(rec, o.out);
  declare_output(rec, o.field);
  declare_output(rec, o.plot);
  if (o.kind == "bubble") return witness_bubble(o, c, rec, clock);
  if (o.kind == "moser") return witness_moser(o, c, rec, clock);
  if (o.kind == "glued") return witness_glued(o, c, rec, clock);
  throw InvalidArgument("unknown witness kind '" + o.kind + "' (moser, glued, bubble)");
}

int run_green(const GreenCmdOptions& o, const Common& c) {
  Stopwatch clock;
  RunRecord rec;
  rec.command = "green";
  rec.parameters = {{"mesh", o.mesh},       {"x0", o.x0},           {"x0_point", o.x0_point},
                    {"annuli", o.annuli},   {"fit_model", o.fit_model}, {"field", o.field}};
  rec.parameters.update(alpha_json(o.alpha));
  check_alpha_choice(o.alpha);
  if ((o.x0 >= 0) == !o.x0_point.empty()) throw InvalidArgument("give exactly one of --x0 or --x0-point");
  std::vector<double> annuli = o.annuli.empty() ? std::vector<double>{0.1, 0.2, 0.2, 0.3} : o.annuli;
  if (annuli.size() % 2 != 0) throw InvalidArgument("--annulus values come in inner,outer pairs");
  const FitModel model = fit_model(o.fit_model);
  declare_output(rec, o.out);
  declare_output(rec, o.field);
  const FemSpace space(load_mesh(o.mesh, rec), assembly(c));
  const Surface& s = space.surface();
  const int x0 = o.x0 >= 0 ? o.x0 : nearest_vertex(s, point_of(o.x0_point, "--x0-point"), true);
  if (x0 >= space.size()) throw InvalidArgument("--x0 out of range");
  Lambda1 l1(space);
  const double alpha = resolve_alpha(o.alpha, l1);
  std::optional<double> lam;
  if (alpha > 0) lam = l1.value();
  const GreenDecomposition g = green_decomposition(space, x0, alpha, annuli[0], annuli[1], model, lam);

  json r;
  r["x0"] = x0;
  r["x0_point"] = point_json(s.vertex(x0));
  r["alpha"] = alpha;
  r["lambda1"] = lam ? json(*lam) : json(nullptr);
  r["A_x0"] = g.A_x0;
  r["fit_report"] = fit_json(g.fit_report);
  r["residual"] = g.residual;
  r["mean"] = mean(g.G, space);
  r["sigma_near"] = sigma_near(g.sigma, x0, space);
  json fits = json::array();
  std::vector<double> As;
  for (std::size_t k = 0; k < annuli.size(); k += 2) {
    const AEstimate a = extract_A(g.G, space, x0, annuli[k], annuli[k + 1], model);
    As.push_back(a.A);
    json f = fit_json(a.report);
    f["A"] = a.A;
    fits.push_back(f);
  }
  r["fits"] = fits;
  if (As.size() >= 2) r["agreement"] = std::abs(As[0] - As[1]) / std::max(std::abs(As[0]), std::abs(As[1]));
  const LogFit lf = fit_log_coefficient(g.G, space, x0, annuli[0], annuli[1]);
  r["log_fit"] = {{"c_log", lf.c_log}, {"c0", lf.c0}, {"rms", lf.rms}, {"vertices", lf.vertices},
                  {"expected", -1 / std::numbers::pi}};
  finish(rec, c, clock);
  OutputSet out;
  out.add(o.out, json_document(rec, {{"result", r}}));
  if (!o.field.empty()) out.add(o.field, field_document(rec, g.G, "G"));
  out.commit();
  std::cout << "A_x0 " << real(g.A_x0) << " residual " << real(g.residual) << "\n";
  return 0;
}

}  // namespace tmlab::cli
