#include "tmlab/green.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "tmlab/errors.hpp"
#include "tmlab/spectrum.hpp"

namespace tmlab {

namespace {

constexpr double kInvPi = 1.0 / std::numbers::pi;

void check_x0(const FemSpace& space, int x0) {
  if (!is_boundary_vertex(space.surface(), x0))
    throw InvalidArgument("x0 = " + std::to_string(x0) + " is not a boundary vertex");
}

Eigen::VectorXd rhs_of(const FemSpace& space, int x0) {
  Eigen::VectorXd b = -space.M1() / space.area();
  b[x0] += 1.0;
  return b;
}

int basis_size(FitModel m) {
  switch (m) {
    case FitModel::constant: return 1;
    case FitModel::affine: return 3;
    case FitModel::quadratic: return 6;
  }
  return 1;
}

template <typename Row>
void fill_basis(Row&& row, const Eigen::Vector2d& d, FitModel m) {
  row[0] = 1.0;
  if (m == FitModel::constant) return;
  row[1] = d.x();
  row[2] = d.y();
  if (m == FitModel::affine) return;
  row[3] = d.x() * d.x();
  row[4] = d.x() * d.y();
  row[5] = d.y() * d.y();
}

std::vector<int> annulus(const FemSpace& space, int x0, double r_inner, double r_outer) {
  if (!(r_inner > 0) || !(r_outer > r_inner)) throw InvalidArgument("annulus needs 0 < r_inner < r_outer");
  const Surface& s = space.surface();
  const Eigen::Vector2d c = s.vertex(x0);
  std::vector<int> idx;
  for (int i = 0; i < s.num_vertices(); ++i) {
    const double r = (s.vertex(i) - c).norm();
    if (i != x0 && r >= r_inner && r <= r_outer) idx.push_back(i);
  }
  if (idx.size() < 30)
    throw InvalidArgument("annulus [" + std::to_string(r_inner) + ", " + std::to_string(r_outer) + "] holds only " +
                          std::to_string(idx.size()) + " vertices (need 30); refine the mesh");
  return idx;
}

}  // namespace

GreenSolve green_function(const FemSpace& space, int x0, double alpha, std::optional<double> lambda1) {
  check_x0(space, x0);
  if (!(alpha >= 0)) throw InvalidArgument("alpha must be non-negative");
  if (alpha > 0) {
    const double l1 = lambda1 ? *lambda1 : first_eigenpair(space).lambda1;
    if (alpha >= l1)
      throw PreconditionViolation("alpha = " + std::to_string(alpha) + " >= lambda1 = " + std::to_string(l1) +
                                  ": K - alpha M is not invertible on mean-zero fields");
  }
  const int n = space.size();
  std::vector<Eigen::Triplet<double>> trip;
  const SparseMatrix A = space.K() - alpha * space.M();
  trip.reserve(A.nonZeros() + 2 * n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, n, space.M1()[i]);
    trip.emplace_back(n, i, space.M1()[i]);
  }
  SparseMatrix B(n + 1, n + 1);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(B);
  lu.factorize(B);
  if (lu.info() != Eigen::Success) throw NumericalFailure("bordered Green system is singular", 0.0);
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = rhs_of(space, x0);
  rhs[n] = 0.0;
  Eigen::VectorXd x = lu.solve(rhs);
  // one step of iterative refinement
  x += lu.solve(rhs - B * x);
  GreenSolve out;
  out.residual = (B * x - rhs).norm() / rhs.norm();
  if (!std::isfinite(out.residual) || out.residual > 1e-10)
    throw NumericalFailure("Green solve residual too large", out.residual);
  out.G = space.field(x.head(n));
  out.multiplier = x[n];
  return out;
}

double green_residual(const Field& G, const FemSpace& space, int x0, double alpha) {
  space.check(G);
  const Eigen::VectorXd b = rhs_of(space, x0);
  const Eigen::VectorXd r0 = space.K() * G.values - alpha * (space.M() * G.values) - b;
  // the multiplier minimizing ||r0 + l M1||
  const double l = -r0.dot(space.M1()) / space.M1().squaredNorm();
  const double mean_part = std::abs(space.M1().dot(G.values));
  return std::hypot((r0 + l * space.M1()).norm(), mean_part) / b.norm();
}

AEstimate extract_A(const Field& G, const FemSpace& space, int x0, double r_inner, double r_outer, FitModel model) {
  space.check(G);
  const auto idx = annulus(space, x0, r_inner, r_outer);
  const Surface& s = space.surface();
  const Eigen::Vector2d c = s.vertex(x0);
  const int p = basis_size(model);
  Eigen::MatrixXd X(idx.size(), p);
  Eigen::VectorXd y(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Vector2d d = s.vertex(idx[k]) - c;
    fill_basis(X.row(k), d, model);
    y[k] = G.values[idx[k]] + kInvPi * std::log(d.norm());
  }
  const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
  AEstimate a;
  a.A = coef[0];
  a.report.r_inner = r_inner;
  a.report.r_outer = r_outer;
  a.report.vertices = static_cast<int>(idx.size());
  a.report.model = model;
  a.report.rms = std::sqrt((X * coef - y).squaredNorm() / idx.size());
  a.report.coefficients.assign(coef.data(), coef.data() + coef.size());
  return a;
}

LogFit fit_log_coefficient(const Field& G, const FemSpace& space, int x0, double r_inner, double r_outer,
                           FitModel extra) {
  space.check(G);
  const auto idx = annulus(space, x0, r_inner, r_outer);
  const Surface& s = space.surface();
  const Eigen::Vector2d c = s.vertex(x0);
  const int p = basis_size(extra) + 1;
  Eigen::MatrixXd X(idx.size(), p);
  Eigen::VectorXd y(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Vector2d d = s.vertex(idx[k]) - c;
    X(k, 0) = std::log(d.norm());
    fill_basis(X.row(k).tail(p - 1), d, extra);
    y[k] = G.values[idx[k]];
  }
  const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
  LogFit f;
  f.c_log = coef[0];
  f.c0 = coef[1];
  f.rms = std::sqrt((X * coef - y).squaredNorm() / idx.size());
  f.vertices = static_cast<int>(idx.size());
  return f;
}

Field sigma_field(const Field& G, double A, int x0, const FemSpace& space) {
  space.check(G);
  const Surface& s = space.surface();
  const Eigen::Vector2d c = s.vertex(x0);
  Eigen::VectorXd sig(s.num_vertices());
  for (int i = 0; i < s.num_vertices(); ++i)
    sig[i] = (i == x0) ? 0.0 : G.values[i] + kInvPi * std::log((s.vertex(i) - c).norm()) - A;
  return space.field(std::move(sig));
}

double sigma_near(const Field& sigma, int x0, const FemSpace& space, int k) {
  const Surface& s = space.surface();
  const Eigen::Vector2d c = s.vertex(x0);
  std::vector<std::pair<double, int>> d;
  for (int i = 0; i < s.num_vertices(); ++i)
    if (i != x0) d.emplace_back((s.vertex(i) - c).squaredNorm(), i);
  k = std::min<int>(k, static_cast<int>(d.size()));
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  double m = 0;
  for (int j = 0; j < k; ++j) m = std::max(m, std::abs(sigma.values[d[j].second]));
  return m;
}

GreenDecomposition green_decomposition(const FemSpace& space, int x0, double alpha, double r_inner, double r_outer,
                                       FitModel model, std::optional<double> lambda1) {
  GreenSolve g = green_function(space, x0, alpha, lambda1);
  GreenDecomposition d;
  d.x0 = x0;
  d.alpha = alpha;
  d.residual = g.residual;
  const AEstimate a = extract_A(g.G, space, x0, r_inner, r_outer, model);
  d.A_x0 = a.A;
  d.fit_report = a.report;
  d.sigma = sigma_field(g.G, a.A, x0, space);
  d.G = std::move(g.G);
  return d;
}

}  // namespace tmlab
