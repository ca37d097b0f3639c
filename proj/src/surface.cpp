#include "tmlab/surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>

#include "tmlab/errors.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

namespace {

using Vec2 = Eigen::Vector2d;
using Tri = std::array<int, 3>;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double tri_signed_area(const std::vector<Vec2>& P, const Tri& t) {
  return 0.5 * cross(P[t[1]] - P[t[0]], P[t[2]] - P[t[0]]);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double L2 = ab.squaredNorm();
  double t = L2 > 0 ? (p - a).dot(ab) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double point_triangle_distance(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
  if (d1 >= 0 && d2 >= 0 && d3 >= 0) return 0.0;
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

// Working representation used by the mesh generators.
struct Builder {
  std::vector<Vec2> P;
  std::vector<Tri> T;

  int add(const Vec2& p) {
    P.push_back(p);
    return static_cast<int>(P.size()) - 1;
  }
  void tri(int a, int b, int c) {
    Tri t{a, b, c};
    if (tri_signed_area(P, t) < 0) std::swap(t[1], t[2]);
    T.push_back(t);
  }
};

// Triangulate the strip between two rings given as vertex lists with
// monotone parameters in [0, 1].
void zip(Builder& B, const std::vector<int>& in, const std::vector<double>& s,
         const std::vector<int>& out, const std::vector<double>& t) {
  std::size_t i = 0, j = 0;
  const std::size_t a = in.size() - 1, b = out.size() - 1;
  while (i < a || j < b) {
    if (i == a) {
      B.tri(in[i], out[j], out[j + 1]);
      ++j;
    } else if (j == b) {
      B.tri(in[i], out[j], in[i + 1]);
      ++i;
    } else if (s[i + 1] < t[j + 1]) {
      B.tri(in[i], out[j], in[i + 1]);
      ++i;
    } else {
      B.tri(in[i], out[j], out[j + 1]);
      ++j;
    }
  }
}

// Polar-ring template for sectors (open) and the full disk (closed).
Builder polar_template(double R, double theta0, double span, bool closed, double h) {
  Builder B;
  const int n = std::max(1, static_cast<int>(std::ceil(R / h - 1e-9)));
  const Vec2 dir0(std::cos(theta0), std::sin(theta0));
  const Vec2 dir1(std::cos(theta0 + span), std::sin(theta0 + span));
  auto exact_dir = [&](const Vec2& d) {
    Vec2 e = d;
    for (int k = 0; k < 2; ++k)
      if (std::abs(e[k]) < 1e-15) e[k] = 0.0;
    if (std::abs(std::abs(e[0]) - 1.0) < 1e-15) e[0] = std::copysign(1.0, e[0]);
    if (std::abs(std::abs(e[1]) - 1.0) < 1e-15) e[1] = std::copysign(1.0, e[1]);
    return e;
  };

  std::vector<int> prev{B.add(Vec2::Zero())};
  std::vector<double> prev_s{0.0};
  for (int k = 1; k <= n; ++k) {
    const double r = (k == n) ? R : R * k / n;
    int m = static_cast<int>(std::ceil(span * r / h - 1e-9));
    m = std::max(m, closed ? 6 : 1);
    std::vector<int> ring;
    std::vector<double> par;
    for (int j = 0; j <= m; ++j) {
      if (closed && j == m) {
        ring.push_back(ring.front());
        par.push_back(1.0);
        break;
      }
      Vec2 p;
      if (!closed && j == 0) p = r * exact_dir(dir0);
      else if (!closed && j == m) p = r * exact_dir(dir1);
      else {
        const double th = theta0 + span * j / m;
        p = Vec2(r * std::cos(th), r * std::sin(th));
      }
      ring.push_back(B.add(p));
      par.push_back(static_cast<double>(j) / m);
    }
    if (prev.size() == 1) {
      for (std::size_t j = 0; j + 1 < ring.size(); ++j) B.tri(prev[0], ring[j], ring[j + 1]);
    } else {
      zip(B, prev, prev_s, ring, par);
    }
    prev = std::move(ring);
    prev_s = std::move(par);
  }
  return B;
}

Builder grid_template(double w, double hgt, double h) {
  Builder B;
  const int nx = std::max(1, static_cast<int>(std::ceil(w / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(hgt / h - 1e-9)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? w : w * i / nx;
      const double y = (j == ny) ? hgt : hgt * j / ny;
      B.add(Vec2(x, y));
    }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      B.tri(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      B.tri(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  return B;
}

double angle_at(const Vec2& apex, const Vec2& a, const Vec2& b) {
  const Vec2 u = a - apex, v = b - apex;
  return std::atan2(std::abs(cross(u, v)), u.dot(v));
}

// Lawson flips towards the Delaunay triangulation of the same vertex set.
void delaunay_flips(Builder& B) {
  for (int pass = 0; pass < 200; ++pass) {
    std::unordered_map<std::uint64_t, std::array<int, 2>> adj;
    adj.reserve(B.T.size() * 2);
    for (int t = 0; t < static_cast<int>(B.T.size()); ++t)
      for (int e = 0; e < 3; ++e) {
        const auto key = edge_key(B.T[t][e], B.T[t][(e + 1) % 3]);
        auto it = adj.find(key);
        if (it == adj.end()) adj.emplace(key, std::array<int, 2>{t, -1});
        else it->second[1] = t;
      }
    std::vector<std::uint64_t> keys;
    keys.reserve(adj.size());
    for (const auto& [k, v] : adj)
      if (v[1] >= 0) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::vector<char> touched(B.T.size(), 0);
    int flips = 0;
    for (auto key : keys) {
      const auto [t0, t1] = adj[key];
      if (touched[t0] || touched[t1]) continue;
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      auto opposite = [&](const Tri& t) {
        for (int v : t)
          if (v != a && v != b) return v;
        return -1;
      };
      const int c = opposite(B.T[t0]), d = opposite(B.T[t1]);
      const double sum = angle_at(B.P[c], B.P[a], B.P[b]) + angle_at(B.P[d], B.P[a], B.P[b]);
      if (sum <= std::numbers::pi + 1e-10) continue;
      Tri n0{c, d, a}, n1{d, c, b};
      if (tri_signed_area(B.P, n0) < 0) std::swap(n0[1], n0[2]);
      if (tri_signed_area(B.P, n1) < 0) std::swap(n1[1], n1[2]);
      const double min_area = 1e-14 * (B.P[a] - B.P[b]).squaredNorm();
      // both new triangles must be properly oriented (convex quad)
      {
        const double s0 = 0.5 * cross(B.P[a] - B.P[c], B.P[d] - B.P[c]);
        const double s1 = 0.5 * cross(B.P[b] - B.P[c], B.P[d] - B.P[c]);
        if (!(s0 * s1 < 0) || std::abs(s0) < min_area || std::abs(s1) < min_area) continue;
      }
      B.T[t0] = n0;
      B.T[t1] = n1;
      touched[t0] = touched[t1] = 1;
      ++flips;
    }
    if (flips == 0) break;
  }
}

Surface from_builder(const Builder& B, std::shared_ptr<const DomainSpec> domain) {
  Eigen::MatrixX2d V(B.P.size(), 2);
  for (std::size_t i = 0; i < B.P.size(); ++i) V.row(i) = B.P[i].transpose();
  Eigen::MatrixX3i T(B.T.size(), 3);
  for (std::size_t i = 0; i < B.T.size(); ++i) T.row(i) << B.T[i][0], B.T[i][1], B.T[i][2];
  return make_surface(std::move(V), std::move(T), Eigen::MatrixX2i(0, 2), Eigen::VectorXd(),
                      std::move(domain));
}

Eigen::MatrixX2i compute_boundary(const Eigen::MatrixX3i& T) {
  std::unordered_map<std::uint64_t, std::pair<int, int>> count;  // key -> (count, directed a)
  std::vector<std::pair<int, int>> directed;
  count.reserve(T.rows() * 2);
  for (int t = 0; t < T.rows(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = T(t, e), b = T(t, (e + 1) % 3);
      auto& c = count[edge_key(a, b)];
      c.first += 1;
      c.second = a;
    }
  std::vector<std::pair<int, int>> edges;
  for (int t = 0; t < T.rows(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = T(t, e), b = T(t, (e + 1) % 3);
      if (count[edge_key(a, b)].first == 1) edges.emplace_back(a, b);
    }
  Eigen::MatrixX2i E(edges.size(), 2);
  for (std::size_t i = 0; i < edges.size(); ++i) E.row(i) << edges[i].first, edges[i].second;
  return E;
}

bool edge_on_arc(const DomainSpec& d, const Vec2& a, const Vec2& b) {
  if (!d.has_arc()) return false;
  const double R = d.radius;
  const double tol = 1e-9 * R;
  if (std::abs(a.norm() - R) > tol || std::abs(b.norm() - R) > tol) return false;
  return (0.5 * (a + b)).norm() > 0.5 * R;
}

double sample_f(const Surface& s, int v) {
  return s.domain ? s.domain->conformal_factor(s.vertices(v, 0), s.vertices(v, 1)) : 0.0;
}

}  // namespace

std::string to_string(Shape s) {
  switch (s) {
    case Shape::half_disk: return "half_disk";
    case Shape::rectangle: return "rectangle";
    case Shape::disk_sector: return "disk_sector";
    case Shape::disk: return "disk";
  }
  return "?";
}

Shape shape_from_string(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "half_disk") return Shape::half_disk;
  if (n == "rectangle") return Shape::rectangle;
  if (n == "disk_sector" || n == "sector") return Shape::disk_sector;
  if (n == "disk") return Shape::disk;
  throw InvalidArgument("unknown shape '" + name + "'");
}

void DomainSpec::validate() const {
  if (!(target_edge_length > 0) || !std::isfinite(target_edge_length))
    throw InvalidArgument("target_edge_length must be positive");
  switch (shape) {
    case Shape::rectangle:
      if (!(width > 0) || !(height > 0)) throw InvalidArgument("rectangle needs positive width and height");
      break;
    case Shape::disk_sector:
      if (!(angle > 0) || angle > 2 * std::numbers::pi - 1e-12)
        throw InvalidArgument("disk_sector angle must lie in (0, 2pi)");
      [[fallthrough]];
    case Shape::half_disk:
    case Shape::disk:
      if (!(radius > 0) || !std::isfinite(radius)) throw InvalidArgument("radius must be positive");
      break;
  }
  // sample f on a coarse lattice over the bounding box of the shape
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  switch (shape) {
    case Shape::rectangle: x1 = width; y1 = height; break;
    case Shape::half_disk: x1 = radius; y0 = -radius; y1 = radius; break;
    default: x0 = -radius; x1 = radius; y0 = -radius; y1 = radius; break;
  }
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) {
      const double v = conformal_factor(x0 + (x1 - x0) * i / 8, y0 + (y1 - y0) * j / 8);
      if (!std::isfinite(v))
        throw InvalidArgument("conformal factor '" + conformal_factor.source() + "' is not finite on the domain");
    }
}

Vec2 DomainSpec::project_to_arc(const Vec2& p) const {
  const double r = p.norm();
  if (!has_arc() || r == 0) return p;
  return p * (radius / r);
}

void Surface::finalize() {
  // FNV-1a over the raw arrays
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const auto nv = vertices.rows(), nt = triangles.rows(), nb = boundary_edges.rows();
  mix(&nv, sizeof nv);
  mix(&nt, sizeof nt);
  mix(&nb, sizeof nb);
  mix(vertices.data(), sizeof(double) * vertices.size());
  mix(triangles.data(), sizeof(int) * triangles.size());
  mix(boundary_edges.data(), sizeof(int) * boundary_edges.size());
  mix(f_nodal.data(), sizeof(double) * f_nodal.size());
  id = h;
  on_boundary.assign(vertices.rows(), 0);
  for (int e = 0; e < boundary_edges.rows(); ++e) {
    on_boundary[boundary_edges(e, 0)] = 1;
    on_boundary[boundary_edges(e, 1)] = 1;
  }
}

void Surface::validate() const {
  const int nv = num_vertices();
  if (f_nodal.size() != nv) throw InvalidArgument("f_nodal length does not match vertex count");
  std::unordered_map<std::uint64_t, int> count;
  for (int t = 0; t < num_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int v = triangles(t, e);
      if (v < 0 || v >= nv) throw InvalidArgument("triangle " + std::to_string(t) + " has a bad vertex index");
      ++count[edge_key(v, triangles(t, (e + 1) % 3))];
    }
    if (!(signed_area(*this, t) > 0)) throw DegenerateTriangle(t);
  }
  int boundary_count = 0;
  for (const auto& [k, c] : count) {
    if (c > 2) throw InvalidArgument("non-manifold edge in mesh");
    if (c == 1) ++boundary_count;
  }
  if (boundary_count != boundary_edges.rows())
    throw InvalidArgument("boundary_edges do not match the edges used by one triangle");
  // closed chains: every boundary vertex has one outgoing and one incoming edge
  std::vector<int> out(nv, 0), in(nv, 0);
  for (int e = 0; e < boundary_edges.rows(); ++e) {
    const int a = boundary_edges(e, 0), b = boundary_edges(e, 1);
    if (a < 0 || a >= nv || b < 0 || b >= nv) throw InvalidArgument("bad boundary edge index");
    auto it = count.find(edge_key(a, b));
    if (it == count.end() || it->second != 1) throw InvalidArgument("boundary edge is not a mesh boundary edge");
    ++out[a];
    ++in[b];
  }
  for (int v = 0; v < nv; ++v)
    if (out[v] != in[v]) throw InvalidArgument("boundary edges do not form closed chains");
}

Surface make_surface(Eigen::MatrixX2d vertices, Eigen::MatrixX3i triangles, Eigen::MatrixX2i boundary_edges,
                     Eigen::VectorXd f_nodal, std::shared_ptr<const DomainSpec> domain) {
  Surface s;
  s.vertices = std::move(vertices);
  s.triangles = std::move(triangles);
  s.domain = std::move(domain);
  s.boundary_edges = boundary_edges.rows() ? std::move(boundary_edges) : compute_boundary(s.triangles);
  if (f_nodal.size() == 0) {
    f_nodal.resize(s.vertices.rows());
    for (int v = 0; v < s.vertices.rows(); ++v) f_nodal[v] = sample_f(s, v);
  }
  s.f_nodal = std::move(f_nodal);
  s.finalize();
  s.validate();
  return s;
}

Surface build_domain(const DomainSpec& spec) {
  spec.validate();
  auto domain = std::make_shared<const DomainSpec>(spec);
  const double h = spec.target_edge_length;
  const double pi = std::numbers::pi;
  Builder B;
  switch (spec.shape) {
    case Shape::rectangle: B = grid_template(spec.width, spec.height, h); break;
    case Shape::half_disk: B = polar_template(spec.radius, -pi / 2, pi, false, h); break;
    case Shape::disk_sector: B = polar_template(spec.radius, 0.0, spec.angle, false, h); break;
    case Shape::disk: B = polar_template(spec.radius, 0.0, 2 * pi, true, h); break;
  }
  if (spec.shape != Shape::rectangle) delaunay_flips(B);
  return from_builder(B, domain);
}

Surface refine(const Surface& s) {
  const int nv = s.num_vertices();
  std::vector<Vec2> P(nv);
  for (int i = 0; i < nv; ++i) P[i] = s.vertex(i);
  std::unordered_map<std::uint64_t, int> mid;
  mid.reserve(s.num_triangles() * 2);
  std::unordered_map<std::uint64_t, char> on_bnd;
  for (int e = 0; e < s.boundary_edges.rows(); ++e)
    on_bnd[edge_key(s.boundary_edges(e, 0), s.boundary_edges(e, 1))] = 1;
  std::vector<double> fvals(s.f_nodal.data(), s.f_nodal.data() + nv);
  auto midpoint = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    Vec2 m = 0.5 * (P[a] + P[b]);
    if (s.domain && on_bnd.count(key) && edge_on_arc(*s.domain, P[a], P[b])) m = s.domain->project_to_arc(m);
    P.push_back(m);
    fvals.push_back(s.domain ? s.domain->conformal_factor(m.x(), m.y()) : 0.5 * (fvals[a] + fvals[b]));
    const int id = static_cast<int>(P.size()) - 1;
    mid.emplace(key, id);
    return id;
  };
  Eigen::MatrixX3i T(4 * s.num_triangles(), 3);
  for (int t = 0; t < s.num_triangles(); ++t) {
    const int a = s.triangles(t, 0), b = s.triangles(t, 1), c = s.triangles(t, 2);
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    T.row(4 * t + 0) << a, ab, ca;
    T.row(4 * t + 1) << ab, b, bc;
    T.row(4 * t + 2) << ca, bc, c;
    T.row(4 * t + 3) << ab, bc, ca;
  }
  Eigen::MatrixX2i E(2 * s.boundary_edges.rows(), 2);
  for (int e = 0; e < s.boundary_edges.rows(); ++e) {
    const int a = s.boundary_edges(e, 0), b = s.boundary_edges(e, 1);
    const int m = mid.at(edge_key(a, b));
    E.row(2 * e) << a, m;
    E.row(2 * e + 1) << m, b;
  }
  Eigen::MatrixX2d V(P.size(), 2);
  for (std::size_t i = 0; i < P.size(); ++i) V.row(i) = P[i].transpose();
  Eigen::VectorXd f = Eigen::Map<Eigen::VectorXd>(fvals.data(), fvals.size());
  if (s.domain)
    for (int v = 0; v < nv; ++v) f[v] = s.domain->conformal_factor(V(v, 0), V(v, 1));
  return make_surface(std::move(V), std::move(T), std::move(E), std::move(f), s.domain);
}

Surface refine_where(const Surface& s, const Vec2& center, const std::function<double(double)>& target) {
  std::vector<Vec2> P(s.num_vertices());
  for (int i = 0; i < s.num_vertices(); ++i) P[i] = s.vertex(i);
  std::vector<double> fvals(s.f_nodal.data(), s.f_nodal.data() + s.f_nodal.size());
  std::vector<Tri> T(s.num_triangles());
  for (int t = 0; t < s.num_triangles(); ++t) T[t] = {s.triangles(t, 0), s.triangles(t, 1), s.triangles(t, 2)};
  std::vector<std::pair<int, int>> bnd;
  for (int e = 0; e < s.boundary_edges.rows(); ++e) bnd.emplace_back(s.boundary_edges(e, 0), s.boundary_edges(e, 1));

  // total order on edges: length, then index pair
  auto longer = [&](int a0, int b0, int a1, int b1) {
    const double l0 = (P[a0] - P[b0]).squaredNorm(), l1 = (P[a1] - P[b1]).squaredNorm();
    if (l0 != l1) return l0 > l1;
    return edge_key(a0, b0) > edge_key(a1, b1);
  };
  auto longest = [&](const Tri& t) {
    int best = 0;
    for (int e = 1; e < 3; ++e)
      if (longer(t[e], t[(e + 1) % 3], t[best], t[(best + 1) % 3])) best = e;
    return best;  // edge (t[best], t[best+1])
  };

  for (int pass = 0; pass < 400; ++pass) {
    std::unordered_map<std::uint64_t, int> marked;  // edge -> midpoint (-1 until created)
    for (const Tri& t : T) {
      const double d = point_triangle_distance(center, P[t[0]], P[t[1]], P[t[2]]);
      const int e = longest(t);
      const double len = (P[t[e]] - P[t[(e + 1) % 3]]).norm();
      if (len > target(d)) marked.emplace(edge_key(t[e], t[(e + 1) % 3]), -1);
    }
    if (marked.empty()) break;
    // closure: a triangle with any marked edge also gets its longest edge marked
    for (bool changed = true; changed;) {
      changed = false;
      for (const Tri& t : T) {
        bool any = false;
        for (int e = 0; e < 3; ++e) any = any || marked.count(edge_key(t[e], t[(e + 1) % 3]));
        if (!any) continue;
        const int e = longest(t);
        if (marked.emplace(edge_key(t[e], t[(e + 1) % 3]), -1).second) changed = true;
      }
    }
    std::unordered_map<std::uint64_t, char> on_bnd;
    for (auto [a, b] : bnd) on_bnd[edge_key(a, b)] = 1;
    auto midpoint = [&](int a, int b) {
      int& slot = marked.at(edge_key(a, b));
      if (slot >= 0) return slot;
      Vec2 m = 0.5 * (P[a] + P[b]);
      if (s.domain && on_bnd.count(edge_key(a, b)) && edge_on_arc(*s.domain, P[a], P[b]))
        m = s.domain->project_to_arc(m);
      P.push_back(m);
      fvals.push_back(s.domain ? s.domain->conformal_factor(m.x(), m.y()) : 0.5 * (fvals[a] + fvals[b]));
      slot = static_cast<int>(P.size()) - 1;
      return slot;
    };
    std::vector<Tri> next;
    next.reserve(T.size() + 2 * marked.size());
    for (const Tri& t : T) {
      const int e = longest(t);
      const int v0 = t[e], v1 = t[(e + 1) % 3], v2 = t[(e + 2) % 3];
      if (!marked.count(edge_key(v0, v1))) {
        next.push_back(t);
        continue;
      }
      const int m01 = midpoint(v0, v1);
      const bool split12 = marked.count(edge_key(v1, v2)) > 0;
      const bool split20 = marked.count(edge_key(v2, v0)) > 0;
      if (split20) {
        const int m20 = midpoint(v2, v0);
        next.push_back({m01, v2, m20});
        next.push_back({m01, m20, v0});
      } else {
        next.push_back({v0, m01, v2});
      }
      if (split12) {
        const int m12 = midpoint(v1, v2);
        next.push_back({m01, v1, m12});
        next.push_back({m01, m12, v2});
      } else {
        next.push_back({m01, v1, v2});
      }
    }
    T = std::move(next);
    std::vector<std::pair<int, int>> nb;
    nb.reserve(bnd.size() + 8);
    for (auto [a, b] : bnd) {
      auto it = marked.find(edge_key(a, b));
      if (it == marked.end()) {
        nb.emplace_back(a, b);
      } else {
        nb.emplace_back(a, it->second);
        nb.emplace_back(it->second, b);
      }
    }
    bnd = std::move(nb);
  }

  Eigen::MatrixX2d V(P.size(), 2);
  for (std::size_t i = 0; i < P.size(); ++i) V.row(i) = P[i].transpose();
  Eigen::MatrixX3i TT(T.size(), 3);
  for (std::size_t i = 0; i < T.size(); ++i) TT.row(i) << T[i][0], T[i][1], T[i][2];
  Eigen::MatrixX2i E(bnd.size(), 2);
  for (std::size_t i = 0; i < bnd.size(); ++i) E.row(i) << bnd[i].first, bnd[i].second;
  Eigen::VectorXd f = Eigen::Map<Eigen::VectorXd>(fvals.data(), fvals.size());
  return make_surface(std::move(V), std::move(TT), std::move(E), std::move(f), s.domain);
}

Surface refine_graded(const Surface& s, const Vec2& center, double h_min, double grading, double h_max) {
  if (!(h_min > 0) || !(grading > 0)) throw InvalidArgument("refine_graded needs h_min > 0 and grading > 0");
  return refine_where(s, center, [=](double d) { return std::min(h_max, h_min + grading * d); });
}

double signed_area(const Surface& s, int t) {
  const Vec2 a = s.vertex(s.triangles(t, 0)), b = s.vertex(s.triangles(t, 1)), c = s.vertex(s.triangles(t, 2));
  return 0.5 * cross(b - a, c - a);
}

double flat_area(const Surface& s) {
  double A = 0;
  for (int t = 0; t < s.num_triangles(); ++t) A += signed_area(s, t);
  return A;
}

double area(const Surface& s) {
  const auto pts = Dunavant6<>::points();
  const auto w = Dunavant6<>::weights();
  double A = 0;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const double at = signed_area(s, t);
    double sum = 0;
    for (int q = 0; q < Dunavant6<>::size; ++q) {
      double f = 0;
      for (int k = 0; k < 3; ++k) f += pts[q][k] * s.f_nodal[s.triangles(t, k)];
      sum += w[q] * std::exp(2 * f);
    }
    A += at * sum;
  }
  return A;
}

double max_edge_length(const Surface& s) {
  double m = 0;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int e = 0; e < 3; ++e)
      m = std::max(m, (s.vertex(s.triangles(t, e)) - s.vertex(s.triangles(t, (e + 1) % 3))).norm());
  return m;
}

double local_edge_length(const Surface& s, const Vec2& c, double r) {
  double m = 0;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const Vec2 a = s.vertex(s.triangles(t, 0)), b = s.vertex(s.triangles(t, 1)), d = s.vertex(s.triangles(t, 2));
    if (point_triangle_distance(c, a, b, d) > r) continue;
    m = std::max({m, (a - b).norm(), (b - d).norm(), (d - a).norm()});
  }
  return m;
}

std::vector<int> boundary_vertices(const Surface& s) {
  std::vector<int> v;
  for (int i = 0; i < s.num_vertices(); ++i)
    if (s.on_boundary[i]) v.push_back(i);
  return v;
}

bool is_boundary_vertex(const Surface& s, int v) {
  return v >= 0 && v < s.num_vertices() && s.on_boundary[v];
}

int nearest_vertex(const Surface& s, const Vec2& p, bool boundary_only) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.num_vertices(); ++i) {
    if (boundary_only && !s.on_boundary[i]) continue;
    const double d = (s.vertex(i) - p).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

double distance_to_boundary(const Surface& s, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (int e = 0; e < s.boundary_edges.rows(); ++e)
    d = std::min(d, point_segment_distance(p, s.vertex(s.boundary_edges(e, 0)), s.vertex(s.boundary_edges(e, 1))));
  return d;
}

PointLocator::PointLocator(const Surface& s) : s_(&s) {
  lo_ = s.vertices.colwise().minCoeff().transpose();
  const Vec2 hi = s.vertices.colwise().maxCoeff().transpose();
  const Vec2 ext = (hi - lo_).cwiseMax(1e-300);
  const double n = std::max(1.0, std::sqrt(static_cast<double>(s.num_triangles())));
  const double aspect = ext.x() / ext.y();
  nx_ = std::max(1, static_cast<int>(std::ceil(n * std::sqrt(aspect))));
  ny_ = std::max(1, static_cast<int>(std::ceil(n / std::sqrt(aspect))));
  cell_ = Vec2(ext.x() / nx_, ext.y() / ny_);
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < s.num_triangles(); ++t) {
    Vec2 tlo = s.vertex(s.triangles(t, 0)), thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(s.vertex(s.triangles(t, k)));
      thi = thi.cwiseMax(s.vertex(s.triangles(t, k)));
    }
    const int i0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Vec2& p, double tol) const {
  const double fx = (p.x() - lo_.x()) / cell_.x(), fy = (p.y() - lo_.y()) / cell_.y();
  if (fx < -1e-9 || fy < -1e-9 || fx > nx_ + 1e-9 || fy > ny_ + 1e-9) return std::nullopt;
  const int i = std::clamp(static_cast<int>(fx), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(fy), 0, ny_ - 1);
  std::optional<Hit> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const Vec2 a = s_->vertex(s_->triangles(t, 0)), b = s_->vertex(s_->triangles(t, 1)),
               c = s_->vertex(s_->triangles(t, 2));
    const double A = cross(b - a, c - a);
    Eigen::Vector3d l(cross(b - p, c - p) / A, cross(c - p, a - p) / A, 0.0);
    l[2] = 1.0 - l[0] - l[1];
    const double mn = l.minCoeff();
    if (mn > best_min) {
      best_min = mn;
      best = Hit{t, l};
    }
  }
  if (!best || best_min < -tol) return std::nullopt;
  return best;
}

std::optional<double> PointLocator::interpolate(const Eigen::VectorXd& values, const Vec2& p) const {
  const auto hit = locate(p, 1e-10);
  if (!hit) return std::nullopt;
  double v = 0;
  for (int k = 0; k < 3; ++k) v += hit->bary[k] * values[s_->triangles(hit->triangle, k)];
  return v;
}

}  // namespace tmlab
