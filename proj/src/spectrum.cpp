#include "tmlab/spectrum.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "tmlab/errors.hpp"

namespace tmlab {

namespace {

void normalize_sign(Eigen::VectorXd& u, const Surface& s) {
  double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
  for (int v = 0; v < s.num_vertices(); ++v) {
    if (!s.on_boundary[v]) continue;
    hi = std::max(hi, u[v]);
    lo = std::min(lo, u[v]);
  }
  if (hi < -lo) u = -u;
}

}  // namespace

double gershgorin_bound(const FemSpace& space) {
  const Eigen::VectorXd lumped = space.M1();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(space.size());
  for (int k = 0; k < space.K().outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(space.K(), k); it; ++it) rows[it.row()] += std::abs(it.value());
  return (rows.array() / lumped.array()).maxCoeff();
}

Eigenpair make_eigenpair(const FemSpace& space, double lambda, Eigen::VectorXd u) {
  if (u.size() != space.size()) throw InvalidArgument("eigenvector length does not match vertex count");
  u = project_mean_zero(u, space);
  const double n2 = u.dot(space.M() * u);
  const double scale = std::max(1.0, std::abs(space.M1().dot(u)));
  if (!(n2 > 1e-24 * scale * scale) || !std::isfinite(n2))
    throw InvalidArgument("eigenvector candidate has no mean-zero component (constant field?)");
  u /= std::sqrt(n2);
  normalize_sign(u, space.surface());
  Eigenpair e;
  e.lambda1 = lambda;
  e.u0 = space.field(std::move(u));
  e.rayleigh_residual = eigen_residual(e, space);
  return e;
}

double eigen_residual(const Eigenpair& e, const FemSpace& space) {
  space.check(e.u0);
  const Eigen::VectorXd Mu = space.M() * e.u0.values;
  return (space.K() * e.u0.values - e.lambda1 * Mu).norm() / Mu.norm();
}

Eigenpair first_eigenpair(const FemSpace& space, double tol, const EigenOptions& opts) {
  if (!(tol > 0)) throw InvalidArgument("tol must be positive");
  const int n = space.size();
  const int p = std::min(opts.block, n - 1);
  if (p < 1) throw InvalidArgument("mesh too small for an eigenproblem");

  // inverse iteration with K^+ on the mean-zero subspace; no shift is needed
  // once constants are removed, and none is wanted on strongly graded meshes
  const MeanZeroSolver& solver = space.mean_zero_solver();

  auto deflate = [&](Eigen::MatrixXd& X) {
    for (int j = 0; j < X.cols(); ++j) X.col(j) = project_mean_zero(X.col(j), space);
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = U(rng);
  deflate(X);

  double res = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd MX = space.M() * X;
    Eigen::MatrixXd Y(n, p);
    for (int j = 0; j < p; ++j) Y.col(j) = solver.solve(MX.col(j));
    deflate(Y);
    const Eigen::MatrixXd KY = space.K() * Y, MY = space.M() * Y;
    Eigen::MatrixXd Kr = Y.transpose() * KY, Mr = Y.transpose() * MY;
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(Kr, Mr);
    if (rr.info() != Eigen::Success) throw NumericalFailure("Rayleigh-Ritz step failed", res);
    theta = rr.eigenvalues();
    X = Y * rr.eigenvectors();
    const Eigen::VectorXd Ku = KY * rr.eigenvectors().col(0), Mu = MY * rr.eigenvectors().col(0);
    res = (Ku - theta[0] * Mu).norm() / Mu.norm();
    if (res <= tol) {
      ++it;
      break;
    }
  }
  if (!(res <= tol)) throw NumericalFailure("eigen iteration did not reach tol", res);

  Eigenpair e = make_eigenpair(space, theta[0], X.col(0));
  // report the Rayleigh quotient of the normalized vector as lambda1
  const Eigen::VectorXd& u = e.u0.values;
  e.lambda1 = u.dot(space.K() * u) / u.dot(space.M() * u);
  e.rayleigh_residual = eigen_residual(e, space);
  e.iterations = it;
  e.ritz.assign(theta.data(), theta.data() + theta.size());
  e.multiplicity = 0;
  for (double t : e.ritz)
    if (std::abs(t - e.lambda1) <= 1e-6 * e.lambda1) ++e.multiplicity;
  e.multiplicity = std::max(1, e.multiplicity);
  return e;
}

}  // namespace tmlab
