#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "tmlab/errors.hpp"

namespace {

int jobs_default() {
  const char* env = std::getenv("TMLAB_JOBS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw tmlab::InvalidArgument("TMLAB_JOBS must be a positive integer");
  return static_cast<int>(v);
}

void add_alpha(CLI::App* cmd, tmlab::cli::AlphaChoice& a) {
  auto* abs = cmd->add_option("--alpha", a.alpha, "Coefficient alpha");
  auto* rel = cmd->add_option("--alpha-rel", a.alpha_rel, "alpha as a multiple of lambda1 on the mesh");
  abs->excludes(rel);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tmlab::cli;
  CLI::App app{"Mean-zero Trudinger-Moser experiments on planar charts"};
  app.require_subcommand(1);
  // -h stays free for the edge length flag of `mesh`
  app.set_help_flag("--help", "Print this help message and exit");
  Common common;
  try {
    common.jobs = jobs_default();
  } catch (const tmlab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  app.add_option("--jobs", common.jobs, "Worker threads (default: TMLAB_JOBS or 1)")->check(CLI::Range(1, 4096));
  app.add_flag("--deterministic,!--no-deterministic", common.deterministic,
               "Leave wall time out of the run record so identical runs give identical bytes (default on)");

  MeshOptions mesh;
  auto* m = app.add_subcommand("mesh", "Build or refine a mesh");
  m->add_option("--shape", mesh.shape, "half-disk, rectangle, disk-sector or disk");
  m->add_option("--radius", mesh.radius);
  m->add_option("--width", mesh.width);
  m->add_option("--height", mesh.height);
  m->add_option("--angle", mesh.angle, "Sector opening in radians");
  m->add_option("--h", mesh.h, "Target edge length");
  m->add_option("--f", mesh.f, "Conformal factor f(x1, x2)");
  m->add_option("--refine", mesh.refine, "Mesh file to refine uniformly");
  m->add_option("--times", mesh.times, "Uniform refinements with --refine");
  m->add_option("--graded", mesh.graded, "Refine towards the point x,y")->delimiter(',')->expected(2);
  m->add_option("--h-min", mesh.h_min, "Edge length at the --graded point");
  m->add_option("--grading", mesh.grading);
  m->add_option("--out", mesh.out)->required();

  EigenCmdOptions eig;
  auto* e = app.add_subcommand("eigen", "First nonzero Neumann eigenpair");
  e->add_option("--mesh", eig.mesh)->required();
  e->add_option("--tol", eig.tol);
  e->add_option("--block", eig.block);
  e->add_option("--seed", eig.seed);
  e->add_option("--out", eig.out)->required();
  e->add_option("--field", eig.field, "Write u0 here");

  MaximizeCmdOptions mx;
  auto* x = app.add_subcommand("maximize", "Subcritical maximizer of F_alpha^{2 pi - eps}");
  x->add_option("--mesh", mx.mesh)->required();
  add_alpha(x, mx.alpha);
  x->add_option("--eps", mx.eps)->required();
  x->add_flag("!--no-eigen-seed", mx.eigen_seed, "Skip the eigenfunction seed");
  x->add_flag("!--no-bubble-seed", mx.bubble_seed, "Skip the bubble seed");
  x->add_option("--bubble-vertex", mx.bubble_vertex);
  x->add_option("--bubble-radius", mx.bubble_radius);
  x->add_option("--tol", mx.tol);
  x->add_option("--max-iter", mx.max_iter);
  x->add_option("--profile-radius", mx.profile_radius, "Sample the rescaled profile out to this radius");
  x->add_option("--resolve-levels", mx.resolve_levels, "Regrade the mesh around the blow-up point this many times");
  x->add_option("--resolved-mesh", mx.resolved_mesh, "Write the regraded mesh here");
  x->add_option("--out", mx.out)->required();
  x->add_option("--field", mx.field);
  x->add_option("--plot", mx.plot, "radius / phi_eps columns");

  SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "Discrete sup along a refinement ladder for several alpha");
  s->add_option("--mesh", sw.mesh)->required();
  s->add_option("--alpha", sw.alphas)->delimiter(',');
  s->add_option("--alpha-rel", sw.alphas_rel)->delimiter(',');
  s->add_option("--eps", sw.eps);
  s->add_option("--levels", sw.levels);
  s->add_option("--factor", sw.factor, "Local edge length ratio between levels");
  s->add_option("--grading", sw.grading);
  s->add_option("--growth", sw.growth, "Ratio counted as growth");
  s->add_option("--point", sw.point, "Boundary point x,y to refine towards")->delimiter(',')->expected(2);
  s->add_option("--out", sw.out, "CSV file")->required();

  WitnessCmdOptions wt;
  auto* w = app.add_subcommand("witness", "Test sequences: moser, glued or bubble");
  w->add_option("kind", wt.kind)->required()->check(CLI::IsMember({"moser", "glued", "bubble"}));
  w->add_option("--mesh", wt.mesh);
  add_alpha(w, wt.alpha);
  w->add_option("--rmax", wt.rmax);
  w->add_option("--samples", wt.samples);
  w->add_option("--fd-h", wt.fd_h);
  w->add_option("--fd-half-width", wt.fd_half_width);
  w->add_option("--ladder", wt.ladder)->delimiter(',');
  w->add_option("--t-exponent", wt.t_exponent);
  w->add_flag("!--no-adapt", wt.adapt, "Use the mesh as given");
  w->add_option("--edges-across", wt.edges_across);
  w->add_option("--grading", wt.grading);
  w->add_option("--eps", wt.eps);
  w->add_option("--annulus", wt.annulus)->delimiter(',')->expected(2);
  w->add_option("--fit-model", wt.fit_model);
  w->add_option("--x0", wt.x0, "Boundary point x,y")->delimiter(',')->expected(2);
  w->add_option("--out", wt.out)->required();
  w->add_option("--field", wt.field);
  w->add_option("--plot", wt.plot);

  GreenCmdOptions gr;
  auto* g = app.add_subcommand("green", "Neumann Green function at a boundary vertex and its constant A");
  g->add_option("--mesh", gr.mesh)->required();
  g->add_option("--x0", gr.x0, "Boundary vertex index");
  g->add_option("--x0-point", gr.x0_point, "Boundary point x,y")->delimiter(',')->expected(2);
  add_alpha(g, gr.alpha);
  g->add_option("--annulus", gr.annuli, "inner,outer (repeatable)")->delimiter(',')->expected(2, 2)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  g->add_option("--fit-model", gr.fit_model);
  g->add_option("--out", gr.out)->required();
  g->add_option("--field", gr.field);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*m) return run_mesh(mesh, common);
    if (*e) return run_eigen(eig, common);
    if (*x) return run_maximize(mx, common);
    if (*s) return run_sweep(sw, common);
    if (*w) return run_witness(wt, common);
    if (*g) return run_green(gr, common);
  } catch (const tmlab::PreconditionViolation& err) {
    std::cerr << "precondition violated: " << err.what() << "\n";
    return 3;
  } catch (const tmlab::NumericalFailure& err) {
    std::cerr << "numerical failure: " << err.what() << " (last residual " << err.last_residual() << ")\n";
    return 4;
  } catch (const tmlab::DegenerateTriangle& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const tmlab::InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
