#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "tmlab/assembly.hpp"
#include "tmlab/surface.hpp"

namespace tmlab::test {

inline DomainSpec rectangle_spec(double w, double h, double edge, const std::string& f = "0") {
  DomainSpec d;
  d.shape = Shape::rectangle;
  d.width = w;
  d.height = h;
  d.target_edge_length = edge;
  d.conformal_factor = Expression(f);
  return d;
}

inline DomainSpec round_spec(Shape shape, double radius, double edge, const std::string& f = "0") {
  DomainSpec d;
  d.shape = shape;
  d.radius = radius;
  d.target_edge_length = edge;
  d.conformal_factor = Expression(f);
  return d;
}

inline Surface unit_square(double h, const std::string& f = "0") { return build_domain(rectangle_spec(1, 1, h, f)); }
inline Surface half_disk(double h) { return build_domain(round_spec(Shape::half_disk, 1, h)); }
inline Surface disk(double h) { return build_domain(round_spec(Shape::disk, 1, h)); }

// Random mean-zero vector for a space, deterministic per seed.
inline Eigen::VectorXd random_mean_zero(const FemSpace& space, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::VectorXd v(space.size());
  for (auto& x : v) x = n(rng);
  return project_mean_zero(v, space);
}

inline Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Independent quadrature: collapsed-coordinate 12 x 12 Gauss-Legendre
// product rule on every triangle. g(u, f) is evaluated with u and f
// interpolated linearly.
template <typename G>
double dense_integral(const Surface& s, const Eigen::VectorXd& u, G&& g) {
  static const double x[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                              0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
  static const double w[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                              0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
  double gx[12], gw[12];
  for (int i = 0; i < 6; ++i) {
    gx[2 * i] = (1 - x[i]) / 2, gw[2 * i] = w[i] / 2;
    gx[2 * i + 1] = (1 + x[i]) / 2, gw[2 * i + 1] = w[i] / 2;
  }
  double total = 0;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const double A = signed_area(s, t);
    double acc = 0;
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) {
        const double a = gx[i], b = gx[j] * (1 - gx[i]);
        const double l[3] = {1 - a - b, a, b};
        double uq = 0, fq = 0;
        for (int k = 0; k < 3; ++k) {
          uq += l[k] * u[s.triangles(t, k)];
          fq += l[k] * s.f_nodal[s.triangles(t, k)];
        }
        // collapse Jacobian (1 - a); reference area 1/2
        acc += gw[i] * gw[j] * (1 - a) * g(uq, fq);
      }
    total += 2 * A * acc;
  }
  return total;
}

}  // namespace tmlab::test
