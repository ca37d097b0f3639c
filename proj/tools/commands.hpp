#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tmlab::cli {

struct Common {
  int jobs = 1;
  bool deterministic = true;
};

struct MeshOptions {
  std::string shape;
  double radius = 1, width = 1, height = 1, angle = 1.5707963267948966;
  double h = 0.1;
  std::string f = "0";
  std::string refine;  // existing mesh to refine
  int times = 1;
  std::vector<double> graded;  // x, y
  double h_min = 0, grading = 0.15;
  std::string out;
};

struct EigenCmdOptions {
  std::string mesh;
  double tol = 1e-9;
  int block = 4;
  unsigned long long seed = 20240601;
  std::string out, field;
};

// alpha given either absolutely or as a multiple of lambda1
struct AlphaChoice {
  std::optional<double> alpha;
  std::optional<double> alpha_rel;
};

struct MaximizeCmdOptions {
  std::string mesh;
  AlphaChoice alpha;
  double eps = 0;
  bool eigen_seed = true, bubble_seed = true;
  int bubble_vertex = -1;
  double bubble_radius = 0;
  double tol = 1e-7;
  int max_iter = 20000;
  double profile_radius = 0;  // 0: no blow-up profile
  int resolve_levels = 0;
  std::string resolved_mesh;
  std::string out, field, plot;
};

struct SweepOptions {
  std::string mesh;
  std::vector<double> alphas, alphas_rel;
  double eps = 0.1;
  int levels = 4;
  double factor = 32, grading = 0.15, growth = 1.5;
  std::vector<double> point;
  std::string out;
};

struct WitnessCmdOptions {
  std::string kind;
  std::string mesh;
  AlphaChoice alpha;
  // bubble
  double rmax = 5;
  int samples = 101;
  double fd_h = 1e-3, fd_half_width = 5;
  // moser
  std::vector<double> ladder{1e-2, 1e-4, 1e-6};
  double t_exponent = 0.3;
  bool adapt = true;
  double edges_across = 8, grading = 0.15;
  // glued
  double eps = 1e-4;
  std::vector<double> annulus{0.1, 0.2};
  std::string fit_model = "quadratic";
  std::vector<double> x0;
  std::string out, field, plot;
};

struct GreenCmdOptions {
  std::string mesh;
  int x0 = -1;
  std::vector<double> x0_point;
  AlphaChoice alpha;
  std::vector<double> annuli;  // flat list of (inner, outer) pairs
  std::string fit_model = "quadratic";
  std::string out, field;
};

int run_mesh(const MeshOptions& o, const Common& c);
int run_eigen(const EigenCmdOptions& o, const Common& c);
int run_maximize(const MaximizeCmdOptions& o, const Common& c);
int run_sweep(const SweepOptions& o, const Common& c);
int run_witness(const WitnessCmdOptions& o, const Common& c);
int run_green(const GreenCmdOptions& o, const Common& c);

}  // namespace tmlab::cli
