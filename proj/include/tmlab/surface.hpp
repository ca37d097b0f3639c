#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmlab/expression.hpp"

namespace tmlab {

/// Shapes available for build_domain. All are given in a fixed placement:
///   half_disk    {x1 >= 0, |x| <= radius}, flat side on x1 = 0
///   rectangle    [0, width] x [0, height]
///   disk_sector  {0 <= arg x <= angle, |x| <= radius}
///   disk         {|x| <= radius}
enum class Shape { half_disk, rectangle, disk_sector, disk };

std::string to_string(Shape s);
Shape shape_from_string(const std::string& name);  // accepts '-' or '_'

struct DomainSpec {
  Shape shape = Shape::rectangle;
  double radius = 1.0;
  double width = 1.0;
  double height = 1.0;
  double angle = 1.5707963267948966;
  double target_edge_length = 0.1;
  Expression conformal_factor;

  /// Throws InvalidArgument for zero or negative sizes, bad angles, or a
  /// conformal factor that is not finite at sampled points.
  void validate() const;

  /// Nearest point of the analytic boundary curve through p. Used to put
  /// new boundary vertices back on arcs; straight sides are left alone.
  Eigen::Vector2d project_to_arc(const Eigen::Vector2d& p) const;
  bool has_arc() const noexcept { return shape != Shape::rectangle; }
};

/// Triangulated planar chart with conformal factor samples.
/// Treated as immutable once built; the id is a hash of the content.
struct Surface {
  Eigen::MatrixX2d vertices;
  Eigen::MatrixX3i triangles;       // counterclockwise
  Eigen::MatrixX2i boundary_edges;  // domain on the left
  Eigen::VectorXd f_nodal;
  std::shared_ptr<const DomainSpec> domain;  // null for meshes read without one
  std::uint64_t id = 0;
  std::vector<char> on_boundary;  // per vertex, filled by finalize()

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_triangles() const { return static_cast<int>(triangles.rows()); }
  Eigen::Vector2d vertex(int i) const { return vertices.row(i).transpose(); }

  /// Recompute the content hash and boundary flags. Call after filling the arrays.
  void finalize();

  /// Checks edge manifoldness, orientation and closed boundary chains.
  /// Throws InvalidArgument (or DegenerateTriangle) on the first problem.
  void validate() const;
};

Surface build_domain(const DomainSpec& spec);

/// Uniform 4-way split.
Surface refine(const Surface& s);

/// Local longest-edge bisection until every triangle at distance d from
/// `center` has longest edge <= min(h_max, h_min + grading * d).
Surface refine_graded(const Surface& s, const Eigen::Vector2d& center, double h_min,
                      double grading, double h_max = 1e300);

/// Same with an explicit per-triangle size target: returns the wanted
/// longest edge for a triangle whose closest point to `center` is at d.
Surface refine_where(const Surface& s, const Eigen::Vector2d& center,
                     const std::function<double(double)>& target);

/// Surface built from raw arrays (e.g. a mesh file). Boundary edges are
/// recomputed when `boundary_edges` is empty. f is re-sampled when a domain
/// is given and `f_nodal` is empty.
Surface make_surface(Eigen::MatrixX2d vertices, Eigen::MatrixX3i triangles,
                     Eigen::MatrixX2i boundary_edges, Eigen::VectorXd f_nodal,
                     std::shared_ptr<const DomainSpec> domain);

double area(const Surface& s);       // integral of e^{2f}
double flat_area(const Surface& s);  // Euclidean area of the triangulation
double max_edge_length(const Surface& s);
/// Longest edge among triangles touching the disk of radius r around c.
double local_edge_length(const Surface& s, const Eigen::Vector2d& c, double r);

std::vector<int> boundary_vertices(const Surface& s);
bool is_boundary_vertex(const Surface& s, int v);
int nearest_vertex(const Surface& s, const Eigen::Vector2d& p, bool boundary_only = false);
double signed_area(const Surface& s, int triangle);
/// Distance from p to the polygonal boundary.
double distance_to_boundary(const Surface& s, const Eigen::Vector2d& p);

/// Bucket grid for point location and P1 interpolation.
class PointLocator {
 public:
  explicit PointLocator(const Surface& s);

  struct Hit {
    int triangle;
    Eigen::Vector3d bary;
  };
  std::optional<Hit> locate(const Eigen::Vector2d& p, double tol = 1e-12) const;
  std::optional<double> interpolate(const Eigen::VectorXd& values, const Eigen::Vector2d& p) const;

 private:
  const Surface* s_;
  Eigen::Vector2d lo_, cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace tmlab
