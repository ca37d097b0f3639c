#pragma once

#include <optional>
#include <vector>

#include "tmlab/assembly.hpp"

namespace tmlab {

struct GreenSolve {
  Field G;
  double residual = 0;    // relative residual of the bordered system
  double multiplier = 0;  // Lagrange multiplier of the mean constraint
};

/// Solves (K - alpha M) G = e_{x0} - M1 / area with 1'M G = 0 through the
/// bordered system. alpha must be below lambda1 (computed when not given).
GreenSolve green_function(const FemSpace& space, int x0, double alpha, std::optional<double> lambda1 = {});

/// Relative residual ||(K - alpha M) G + l M1 - rhs|| / ||rhs|| with l the
/// least-squares multiplier.
double green_residual(const Field& G, const FemSpace& space, int x0, double alpha);

/// Model for the smooth remainder when fitting G + (1/pi) log|x - x0| on an
/// annulus: a constant, or a constant plus the first/second order Taylor
/// terms in x - x0. The constant term is A.
enum class FitModel { constant, affine, quadratic };

struct FitReport {
  double r_inner = 0, r_outer = 0;
  int vertices = 0;
  double rms = 0;  // residual RMS of the fit
  FitModel model = FitModel::constant;
  std::vector<double> coefficients;
};

struct AEstimate {
  double A = 0;
  FitReport report;
};

/// Least-squares estimate of A over the vertices with r_inner <= |x - x0| <= r_outer.
/// Throws InvalidArgument with fewer than 30 such vertices.
AEstimate extract_A(const Field& G, const FemSpace& space, int x0, double r_inner, double r_outer,
                    FitModel model = FitModel::constant);

/// Two-parameter fit G ~ c_log log|x - x0| + c0 (plus optional Taylor terms).
struct LogFit {
  double c_log = 0, c0 = 0, rms = 0;
  int vertices = 0;
};
LogFit fit_log_coefficient(const Field& G, const FemSpace& space, int x0, double r_inner, double r_outer,
                           FitModel extra = FitModel::constant);

/// sigma = G + (1/pi) log|x - x0| - A, with sigma(x0) set to 0.
Field sigma_field(const Field& G, double A, int x0, const FemSpace& space);
/// Largest |sigma| over the k vertices nearest to x0 (x0 itself excluded).
double sigma_near(const Field& sigma, int x0, const FemSpace& space, int k = 6);

struct GreenDecomposition {
  Field G;
  int x0 = -1;
  double alpha = 0;
  double A_x0 = 0;
  Field sigma;
  FitReport fit_report;
  double residual = 0;
};

GreenDecomposition green_decomposition(const FemSpace& space, int x0, double alpha, double r_inner,
                                       double r_outer, FitModel model = FitModel::quadratic,
                                       std::optional<double> lambda1 = {});

}  // namespace tmlab
