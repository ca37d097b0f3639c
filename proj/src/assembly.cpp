#include "tmlab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "tmlab/errors.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

namespace {

using Triplet = Eigen::Triplet<double>;

// Local 3x3 matrices for one triangle.
using Local = Eigen::Matrix3d;

Local local_stiffness(const Surface& s, int t) {
  const Eigen::Vector2d a = s.vertex(s.triangles(t, 0)), b = s.vertex(s.triangles(t, 1)),
                        c = s.vertex(s.triangles(t, 2));
  const double A = signed_area(s, t);
  if (!(A > 0)) throw DegenerateTriangle(t);
  // gradients of barycentrics are rot(opposite edge) / 2A
  Eigen::Matrix<double, 3, 2> e;
  e.row(0) = (c - b).transpose();
  e.row(1) = (a - c).transpose();
  e.row(2) = (b - a).transpose();
  return (e * e.transpose()) / (4 * A);
}

Local local_mass(const Surface& s, int t) {
  const double A = signed_area(s, t);
  if (!(A > 0)) throw DegenerateTriangle(t);
  const auto pts = Dunavant6<>::points();
  const auto w = Dunavant6<>::weights();
  Local m = Local::Zero();
  for (int q = 0; q < Dunavant6<>::size; ++q) {
    const Eigen::Vector3d l(pts[q][0], pts[q][1], pts[q][2]);
    double f = 0;
    for (int k = 0; k < 3; ++k) f += l[k] * s.f_nodal[s.triangles(t, k)];
    m += (w[q] * A * std::exp(2 * f)) * (l * l.transpose());
  }
  return m;
}

template <typename LocalFn>
SparseMatrix assemble(const Surface& s, const AssemblyOptions& opts, LocalFn local) {
  const int nt = s.num_triangles();
  std::vector<Triplet> trip(static_cast<std::size_t>(nt) * 9);
  auto work = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const Local L = local(s, t);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trip[static_cast<std::size_t>(t) * 9 + 3 * i + j] = Triplet(s.triangles(t, i), s.triangles(t, j), L(i, j));
    }
  };
  const int jobs = std::max(1, opts.jobs);
  if (opts.reduction == Reduction::parallel && jobs > 1 && nt > 1000) {
    // local matrices are computed concurrently; the sum is formed below in
    // triangle order, so both modes give the same bits
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex m;
    for (int k = 0; k < jobs; ++k) {
      const int b = static_cast<int>(static_cast<long>(nt) * k / jobs);
      const int e = static_cast<int>(static_cast<long>(nt) * (k + 1) / jobs);
      pool.emplace_back([&, b, e] {
        try {
          work(b, e);
        } catch (...) {
          std::lock_guard<std::mutex> g(m);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  } else {
    work(0, nt);
  }
  SparseMatrix A(s.num_vertices(), s.num_vertices());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SparseMatrix stiffness(const Surface& s, const AssemblyOptions& opts) { return assemble(s, opts, local_stiffness); }

SparseMatrix mass(const Surface& s, const AssemblyOptions& opts) { return assemble(s, opts, local_mass); }

Eigen::VectorXd lumped_mass(const Surface& s) {
  const SparseMatrix M = mass(s);
  return M * Eigen::VectorXd::Ones(s.num_vertices());
}

FemSpace::FemSpace(Surface s, const AssemblyOptions& opts) : s_(std::move(s)) {
  K_ = stiffness(s_, opts);
  M_ = mass(s_, opts);
  M1_ = M_ * Eigen::VectorXd::Ones(s_.num_vertices());
  area_ = M1_.sum();
  solver_ = std::make_shared<const MeanZeroSolver>(K_, M1_);
  using Rule = Dunavant16<>;
  constexpr int nq = Rule::size;
  const auto pts = Rule::points();
  const auto w = Rule::weights();
  qw_.resize(nq * s_.num_triangles());
  for (int t = 0; t < s_.num_triangles(); ++t) {
    const double A = signed_area(s_, t);
    for (int q = 0; q < nq; ++q) {
      double f = 0;
      for (int k = 0; k < 3; ++k) f += pts[q][k] * s_.f_nodal[s_.triangles(t, k)];
      qw_[nq * t + q] = w[q] * A * std::exp(2 * f);
    }
  }
}

Eigen::VectorXd FemSpace::at_quad_points(const Eigen::VectorXd& u) const {
  constexpr int nq = Dunavant16<>::size;
  const auto pts = Dunavant16<>::points();
  Eigen::VectorXd uq(nq * s_.num_triangles());
  for (int t = 0; t < s_.num_triangles(); ++t) {
    const double a = u[s_.triangles(t, 0)], b = u[s_.triangles(t, 1)], c = u[s_.triangles(t, 2)];
    for (int q = 0; q < nq; ++q) uq[nq * t + q] = pts[q][0] * a + pts[q][1] * b + pts[q][2] * c;
  }
  return uq;
}

Eigen::VectorXd FemSpace::load(const Eigen::VectorXd& g) const {
  constexpr int nq = Dunavant16<>::size;
  const auto pts = Dunavant16<>::points();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(size());
  for (int t = 0; t < s_.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      double acc = 0;
      for (int q = 0; q < nq; ++q) acc += pts[q][k] * g[nq * t + q];
      r[s_.triangles(t, k)] += acc;
    }
  return r;
}

Field FemSpace::field(Eigen::VectorXd values) const {
  if (values.size() != size()) throw InvalidArgument("field length does not match vertex count");
  return Field{std::move(values), s_.id};
}

void FemSpace::check(const Field& u) const {
  if (u.surface_id != s_.id) throw InvalidArgument("field belongs to a different surface");
  if (u.values.size() != size()) throw InvalidArgument("field length does not match vertex count");
}

MeanZeroSolver::MeanZeroSolver(const SparseMatrix& K0, Eigen::VectorXd M1) : M1_(std::move(M1)), area_(M1_.sum()) {
  // ground vertex 0: replace its row and column by the identity
  SparseMatrix K = K0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it)
      if (it.row() == 0 || it.col() == 0) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
  K.prune(0.0);
  ldlt_.compute(K);
  if (ldlt_.info() != Eigen::Success) throw NumericalFailure("factorization of the grounded stiffness failed", 0.0);
}

Eigen::VectorXd MeanZeroSolver::solve(const Eigen::VectorXd& r) const {
  Eigen::VectorXd b = r - (r.sum() / area_) * M1_;
  b[0] = 0.0;
  Eigen::VectorXd x = ldlt_.solve(b);
  return x.array() - M1_.dot(x) / area_;
}

double weighted_mean(const Eigen::VectorXd& u, const FemSpace& space) { return space.M1().dot(u) / space.area(); }

Eigen::VectorXd project_mean_zero(const Eigen::VectorXd& u, const FemSpace& space) {
  return u.array() - weighted_mean(u, space);
}

double mean(const Field& u, const FemSpace& space) {
  space.check(u);
  return weighted_mean(u.values, space);
}

double l2_norm(const Field& u, const FemSpace& space) {
  space.check(u);
  return std::sqrt(std::max(0.0, u.values.dot(space.M() * u.values)));
}

double dirichlet_norm(const Field& u, const FemSpace& space) {
  space.check(u);
  return std::sqrt(std::max(0.0, u.values.dot(space.K() * u.values)));
}

Field mean_zero_project(const Field& u, const FemSpace& space) {
  space.check(u);
  return Field{project_mean_zero(u.values, space), u.surface_id};
}

}  // namespace tmlab
