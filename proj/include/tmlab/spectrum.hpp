#pragma once

#include <vector>

#include "tmlab/assembly.hpp"

namespace tmlab {

struct Eigenpair {
  double lambda1 = 0;
  Field u0;  // mean zero, unit weighted L2 norm, positive boundary max
  double rayleigh_residual = 0;
  int iterations = 0;
  int multiplicity = 1;      // Ritz values within 1e-6 relative of lambda1
  std::vector<double> ritz;  // final Ritz values of the block, ascending
};

struct EigenOptions {
  int block = 4;
  int max_iterations = 2000;
  std::uint64_t seed = 20240601;
};

/// Smallest nonzero eigenpair of K u = lambda M u on weighted-mean-zero
/// fields. Throws NumericalFailure when the residual stays above tol.
Eigenpair first_eigenpair(const FemSpace& space, double tol = 1e-9, const EigenOptions& opts = {});

/// ||K u - lambda M u|| / ||M u||.
double eigen_residual(const Eigenpair& e, const FemSpace& space);

/// Normalizes (mean zero, unit L2, sign) and wraps a candidate pair.
/// A field with no mean-zero part is rejected with InvalidArgument.
Eigenpair make_eigenpair(const FemSpace& space, double lambda, Eigen::VectorXd u);

/// Upper bound on the largest generalized eigenvalue (Gershgorin on the
/// lumped-mass scaled stiffness).
double gershgorin_bound(const FemSpace& space);

}  // namespace tmlab
