#include "tmlab/io.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmlab/errors.hpp"

namespace tmlab {

using nlohmann::json;

namespace {

bool is_flat(const json& j) {
  if (j.is_primitive()) return true;
  if (j.is_array()) {
    for (const auto& e : j)
      if (!e.is_primitive()) return false;
    return true;
  }
  return false;
}

void emit(const json& j, int indent, int depth, std::string& out) {
  auto newline = [&](int d) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        emit(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // numeric rows stay on one line; nested structure is broken up
      const bool inline_all = is_flat(j);
      bool rows = true;
      for (const auto& e : j) rows = rows && is_flat(e);
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        if (!inline_all) {
          if (rows && indent > 0) out += ' ';
          else newline(depth + 1);
        }
        emit(e, rows ? 0 : indent, depth + 1, out);
      }
      if (!inline_all && !rows) newline(depth);
      out += ']';
      return;
    }
    default:
      out += j.dump();
  }
}

Eigen::VectorXd to_vector(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string("'") + what + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

std::string canonical_dump(const json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += '\n';
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("cannot open '" + tmp + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw InvalidArgument("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidArgument("cannot rename onto '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned char c : md) {
    s += hex[c >> 4];
    s += hex[c & 15];
  }
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json domain_to_json(const DomainSpec& d) {
  json j;
  j["shape"] = to_string(d.shape);
  switch (d.shape) {
    case Shape::rectangle:
      j["width"] = d.width;
      j["height"] = d.height;
      break;
    case Shape::disk_sector:
      j["angle"] = d.angle;
      [[fallthrough]];
    default:
      j["radius"] = d.radius;
  }
  j["target_edge_length"] = d.target_edge_length;
  j["conformal_factor"] = d.conformal_factor.source();
  return j;
}

DomainSpec domain_from_json(const json& j) {
  DomainSpec d;
  d.shape = shape_from_string(j.at("shape").get<std::string>());
  d.radius = j.value("radius", d.radius);
  d.width = j.value("width", d.width);
  d.height = j.value("height", d.height);
  d.angle = j.value("angle", d.angle);
  d.target_edge_length = j.value("target_edge_length", d.target_edge_length);
  d.conformal_factor = Expression(j.value("conformal_factor", std::string("0")));
  d.validate();
  return d;
}

json mesh_to_json(const Surface& s) {
  json j;
  j["format_version"] = kFormatVersion;
  json V = json::array(), T = json::array(), B = json::array(), F = json::array();
  for (int i = 0; i < s.num_vertices(); ++i) V.push_back({s.vertices(i, 0), s.vertices(i, 1)});
  for (int t = 0; t < s.num_triangles(); ++t) T.push_back({s.triangles(t, 0), s.triangles(t, 1), s.triangles(t, 2)});
  for (int e = 0; e < s.boundary_edges.rows(); ++e) B.push_back({s.boundary_edges(e, 0), s.boundary_edges(e, 1)});
  for (int i = 0; i < s.num_vertices(); ++i) F.push_back(s.f_nodal[i]);
  j["vertices"] = std::move(V);
  j["triangles"] = std::move(T);
  j["boundary_edges"] = std::move(B);
  j["f_nodal"] = std::move(F);
  if (s.domain) j["domain"] = domain_to_json(*s.domain);
  return j;
}

Surface mesh_from_json(const json& j) {
  try {
    if (j.value("format_version", kFormatVersion) != kFormatVersion)
      throw InvalidArgument("unsupported mesh format_version");
    const auto& jv = j.at("vertices");
    const auto& jt = j.at("triangles");
    Eigen::MatrixX2d V(jv.size(), 2);
    for (std::size_t i = 0; i < jv.size(); ++i) {
      V(i, 0) = jv[i].at(0).get<double>();
      V(i, 1) = jv[i].at(1).get<double>();
    }
    Eigen::MatrixX3i T(jt.size(), 3);
    for (std::size_t i = 0; i < jt.size(); ++i)
      for (int k = 0; k < 3; ++k) T(i, k) = jt[i].at(k).get<int>();
    Eigen::MatrixX2i B(0, 2);
    if (j.contains("boundary_edges")) {
      const auto& jb = j["boundary_edges"];
      B.resize(jb.size(), 2);
      for (std::size_t i = 0; i < jb.size(); ++i)
        for (int k = 0; k < 2; ++k) B(i, k) = jb[i].at(k).get<int>();
    }
    std::shared_ptr<const DomainSpec> domain;
    if (j.contains("domain")) domain = std::make_shared<const DomainSpec>(domain_from_json(j["domain"]));
    Eigen::VectorXd f;
    if (j.contains("f_nodal")) f = to_vector(j["f_nodal"], "f_nodal");
    return make_surface(std::move(V), std::move(T), std::move(B), std::move(f), std::move(domain));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed mesh JSON: ") + e.what());
  }
}

void write_mesh(const std::string& path, const Surface& s) { atomic_write(path, canonical_dump(mesh_to_json(s))); }

Surface read_mesh(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
  return mesh_from_json(j);
}

json field_to_json(const Field& u, const std::string& name) {
  json j;
  j["format_version"] = kFormatVersion;
  j["name"] = name;
  j["surface_id"] = hex64(u.surface_id);
  json v = json::array();
  for (int i = 0; i < u.values.size(); ++i) v.push_back(u.values[i]);
  j["values"] = std::move(v);
  return j;
}

Field field_from_json(const json& j, const FemSpace& space) {
  Field u = space.field(to_vector(j.at("values"), "values"));
  if (j.contains("surface_id") && j["surface_id"].get<std::string>() != hex64(space.surface().id))
    throw InvalidArgument("field file belongs to a different mesh");
  return u;
}

}  // namespace tmlab
