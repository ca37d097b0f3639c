#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <memory>

#include "tmlab/surface.hpp"

namespace tmlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Reduction { sequential, parallel };

struct AssemblyOptions {
  Reduction reduction = Reduction::sequential;
  int jobs = 1;  // used only with Reduction::parallel
};

/// P1 Dirichlet energy matrix. Independent of the conformal factor.
SparseMatrix stiffness(const Surface& s, const AssemblyOptions& opts = {});
/// Consistent mass matrix of the measure e^{2f} dx.
SparseMatrix mass(const Surface& s, const AssemblyOptions& opts = {});
/// Row sums of the consistent mass; diagnostics only.
Eigen::VectorXd lumped_mass(const Surface& s);

/// Nodal coefficients tied to one surface.
struct Field {
  Eigen::VectorXd values;
  std::uint64_t surface_id = 0;
};

class MeanZeroSolver;

/// Surface plus its assembled operators.
class FemSpace {
 public:
  explicit FemSpace(Surface s, const AssemblyOptions& opts = {});

  const Surface& surface() const { return s_; }
  const SparseMatrix& K() const { return K_; }
  const SparseMatrix& M() const { return M_; }
  const Eigen::VectorXd& M1() const { return M1_; }  // M * ones
  double area() const { return area_; }
  int size() const { return s_.num_vertices(); }

  /// Weights w_q |T| e^{2 f(x_q)} of the 16-point rule used for the
  /// exponential integrands, stored triangle-major (index 16 t + q).
  const Eigen::VectorXd& quad_weights() const { return qw_; }
  /// u at the quadrature points, same layout.
  Eigen::VectorXd at_quad_points(const Eigen::VectorXd& u) const;
  /// sum_q g_q phi_i(x_q) for data g at quadrature points (load vector).
  Eigen::VectorXd load(const Eigen::VectorXd& g_at_quad) const;

  /// K^+ on mean-zero data: solves K x = r - (1'r / area) M1, returns x with
  /// zero weighted mean. Factorized in the constructor.
  const MeanZeroSolver& mean_zero_solver() const { return *solver_; }

  Field field(Eigen::VectorXd values) const;
  /// Throws InvalidArgument unless u lives on this surface.
  void check(const Field& u) const;

 private:
  Surface s_;
  SparseMatrix K_, M_;
  Eigen::VectorXd M1_;
  double area_ = 0;
  Eigen::VectorXd qw_;
  std::shared_ptr<const MeanZeroSolver> solver_;
};

class MeanZeroSolver {
 public:
  MeanZeroSolver(const SparseMatrix& K, Eigen::VectorXd M1);
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;

 private:
  Eigen::VectorXd M1_;
  double area_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

double mean(const Field& u, const FemSpace& space);
double l2_norm(const Field& u, const FemSpace& space);
double dirichlet_norm(const Field& u, const FemSpace& space);
Field mean_zero_project(const Field& u, const FemSpace& space);

/// Vector forms of the same, for inner loops.
double weighted_mean(const Eigen::VectorXd& u, const FemSpace& space);
Eigen::VectorXd project_mean_zero(const Eigen::VectorXd& u, const FemSpace& space);

/// Nodal interpolant of a closed-form function.
template <typename F>
Eigen::VectorXd interpolate(const Surface& s, F&& fn) {
  Eigen::VectorXd v(s.num_vertices());
  for (int i = 0; i < s.num_vertices(); ++i) v[i] = fn(s.vertices(i, 0), s.vertices(i, 1));
  return v;
}

}  // namespace tmlab
