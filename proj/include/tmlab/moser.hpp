#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmlab/assembly.hpp"
#include "tmlab/spectrum.hpp"

namespace tmlab {

/// Exponents beta * u^2 * (1 + alpha ||u||^2) are clamped here.
inline constexpr double kExponentCap = 700.0;

/// Value of the exponential functional; `tainted` is set when the clamp hit.
struct FunctionalValue {
  double value = 0;
  bool tainted = false;
};

/// int e^{beta u^2 (1 + alpha ||u||_2^2)} dv_g by per-triangle quadrature.
FunctionalValue functional(const Field& u, double alpha, double beta, const FemSpace& space);

/// Euclidean gradient of the functional w.r.t. the nodal values.
Eigen::VectorXd functional_gradient(const Field& u, double alpha, double beta, const FemSpace& space);

struct ELCoefficients {
  double alpha_eps = 0;   // beta (1 + alpha ||u||^2)
  double beta_eps = 1;    // (1 + alpha ||u||^2) / (1 + 2 alpha ||u||^2)
  double gamma_eps = 0;   // alpha / (1 + 2 alpha ||u||^2)
  double lambda_eps = 0;  // int u^2 e^{alpha_eps u^2}
  double mu_eps = 0;      // beta_eps / area * int u e^{alpha_eps u^2}
  bool tainted = false;
};

ELCoefficients el_coefficients(const Field& u, double alpha, double eps, const FemSpace& space);
/// Same with the exponent given directly as beta = 2 pi - eps.
ELCoefficients el_coefficients_beta(const Field& u, double alpha, double beta, const FemSpace& space);

/// Dual (K^+) norm of K u - (beta_e/lambda_e) u e^{alpha_e u^2} - gamma_e u + mu_e/lambda_e,
/// the right-hand side tested against P1 functions by quadrature.
double el_residual(const Field& u, const ELCoefficients& c, const FemSpace& space);
/// Residual vector itself (in the load-vector space).
Eigen::VectorXd el_residual_vector(const Field& u, const ELCoefficients& c, const FemSpace& space);

struct MaximizeOptions {
  double tol = 1e-7;  // on the scale-free stationarity measure (= el_residual)
  int max_iterations = 20000;
  bool eigen_seed = true;
  bool bubble_seed = true;
  int bubble_vertex = -1;       // default: boundary vertex where u0 is largest
  double bubble_radius = 0;     // default: 0.1 sqrt(area)
  std::optional<Eigen::VectorXd> initial;  // extra warm-start seed
  std::optional<Eigenpair> eigen;          // reuse instead of recomputing
};

struct MaximizerResult {
  Field u_eps;
  double F_value = 0;
  double F_initial = 0;
  ELCoefficients coefficients;
  double el_residual = 0;
  int iterations = 0;
  bool converged = false;
  bool tainted = false;
  std::string seed;
};

struct MaximizerReport {
  MaximizerResult best;
  std::vector<MaximizerResult> seeds;  // one per seed, in seed order
  double lambda1 = 0;
};

/// Ascent for sup F_alpha^{2 pi - eps} over {||grad u|| = 1, mean 0}.
/// Refuses alpha >= lambda1 and eps outside (0, 2 pi) with PreconditionViolation.
MaximizerReport maximize_subcritical(const FemSpace& space, double alpha, double eps,
                                     const MaximizeOptions& opts = {});

/// Same ascent for an arbitrary exponent beta > 0 (no threshold checks on beta).
MaximizerReport maximize_functional(const FemSpace& space, double alpha, double beta,
                                    const MaximizeOptions& opts = {});

/// Single ascent run from a given start (projected onto the constraint first).
MaximizerResult ascend(const FemSpace& space, double alpha, double beta, Eigen::VectorXd start,
                       const MaximizeOptions& opts, const std::string& seed_name);

/// Retraction onto the constraint set: subtract the weighted mean, rescale
/// to unit Dirichlet norm.
Eigen::VectorXd retract(const Eigen::VectorXd& u, const FemSpace& space);

struct ProfileSample {
  double radius;
  double angle;
  double psi;
  double phi;
};

struct BlowupDiagnostics {
  double c_eps = 0;
  int x_vertex = -1;
  Eigen::Vector2d x_eps = Eigen::Vector2d::Zero();
  double r_eps = 0;
  double chart_scale = 1;  // e^{-f(x_eps)}: sample points are x_eps + r_eps chart_scale y
  double sign = 1;  // +1 if the max of |u| is a maximum, -1 for a minimum
  std::vector<ProfileSample> profile;
  int skipped = 0;  // samples that fell outside the domain

  /// Mean of phi over the in-domain samples at the given sampled radius.
  std::optional<double> radial_phi(double radius) const;
  std::optional<double> radial_psi(double radius) const;
};

struct ProfileOptions {
  int radial_samples = 20;
  int angular_samples = 64;
};

BlowupDiagnostics blowup_diagnostics(const Field& u, const ELCoefficients& c, const FemSpace& space, double R,
                                     const ProfileOptions& opts = {});

struct ResolveOptions {
  int levels = 4;              // graded remeshes after the first solve
  double scale_fraction = 1.0 / 30;  // edge length at x_eps relative to r_eps
  double grading = 0.15;
  double profile_radius = 1;
  ProfileOptions profile;
  MaximizeOptions maximize;
};

struct ResolvedBlowup {
  Surface mesh;
  MaximizerResult best;
  BlowupDiagnostics diagnostics;
  std::vector<double> r_history;  // r_eps before each remesh, then the final one
};

/// Maximizer of F_alpha^{2pi - eps} whose blow-up scale is resolved: the base
/// mesh is regraded around x_eps down to `scale_fraction` r_eps and the
/// ascent restarted from the interpolated previous maximizer, `levels` times.
ResolvedBlowup resolve_blowup(const Surface& base, double alpha, double eps, const ResolveOptions& opts = {});

}  // namespace tmlab
