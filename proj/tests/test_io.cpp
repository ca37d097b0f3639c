#include <doctest.h>

#include <filesystem>

#include "support.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/io.hpp"

using namespace tmlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tmlab_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("content hash matches git blob ids") {
  // values from `git hash-object`
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(content_hash("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("hex64 is fixed width") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("canonical dump sorts keys and keeps every bit of a double") {
  json a = {{"z", 0.1}, {"a", {1, 2, 3}}, {"m", {{"y", 1.0 / 3}, {"b", true}}}};
  json b;
  b["m"]["b"] = true;
  b["m"]["y"] = 1.0 / 3;
  b["a"] = {1, 2, 3};
  b["z"] = 0.1;
  const auto sa = canonical_dump(a);
  CHECK(sa == canonical_dump(b));
  CHECK(sa.find("\"a\"") < sa.find("\"m\""));
  CHECK(sa.find("\"m\"") < sa.find("\"z\""));
  const double back = json::parse(sa)["m"]["y"].get<double>();
  CHECK(back == 1.0 / 3);
  CHECK(canonical_dump(json(std::nan(""))) == "null\n");
}

TEST_CASE("mesh round trip is bit exact") {
  auto s = test::unit_square(0.2, "0.3*x1 - x2*x2");
  const auto text = canonical_dump(mesh_to_json(s));
  const auto r = mesh_from_json(json::parse(text));
  CHECK(r.vertices == s.vertices);
  CHECK(r.triangles == s.triangles);
  CHECK(r.boundary_edges == s.boundary_edges);
  CHECK(r.f_nodal == s.f_nodal);
  CHECK(r.id == s.id);
  REQUIRE(r.domain);
  CHECK(r.domain->conformal_factor.source() == s.domain->conformal_factor.source());
  CHECK(canonical_dump(mesh_to_json(r)) == text);
}

TEST_CASE("mesh files through atomic write") {
  const auto dir = scratch_dir("mesh");
  const auto path = (dir / "m.json").string();
  auto s = test::half_disk(0.2);
  write_mesh(path, s);
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  auto r = read_mesh(path);
  CHECK(r.id == s.id);
  write_mesh(path, r);
  CHECK(read_file(path) == canonical_dump(mesh_to_json(s)));
  fs::remove_all(dir);
}

TEST_CASE("malformed mesh input is an InvalidArgument") {
  const auto dir = scratch_dir("bad");
  const auto path = (dir / "bad.json").string();
  atomic_write(path, "{not json");
  CHECK_THROWS_AS(read_mesh(path), InvalidArgument);
  CHECK_THROWS_AS(read_mesh((dir / "missing.json").string()), InvalidArgument);
  CHECK_THROWS_AS(mesh_from_json(json{{"vertices", 3}}), InvalidArgument);
  auto j = mesh_to_json(test::unit_square(0.5));
  j["format_version"] = 99;
  CHECK_THROWS_AS(mesh_from_json(j), InvalidArgument);
  CHECK_THROWS_AS(atomic_write((dir / "no" / "such" / "x").string(), "x"), InvalidArgument);
  fs::remove_all(dir);
}

TEST_CASE("domain description round trip") {
  auto d = test::round_spec(Shape::disk_sector, 1.5, 0.1, "x1");
  d.angle = 1.0;
  auto r = domain_from_json(domain_to_json(d));
  CHECK(r.shape == Shape::disk_sector);
  CHECK(r.radius == 1.5);
  CHECK(r.angle == 1.0);
  CHECK(r.target_edge_length == 0.1);
  CHECK(r.conformal_factor.source() == "x1");
}

TEST_CASE("field round trip and mesh check") {
  auto s = test::unit_square(0.25);
  FemSpace space(s);
  const Field u = space.field(test::random_vector(space.size(), 5));
  const auto j = json::parse(canonical_dump(field_to_json(u, "u")));
  CHECK(j["name"] == "u");
  const Field r = field_from_json(j, space);
  CHECK(r.values == u.values);

  FemSpace other(test::unit_square(0.25, "0.1"));
  REQUIRE(other.size() == space.size());
  CHECK_THROWS_AS(field_from_json(j, other), InvalidArgument);

  FemSpace coarse(test::unit_square(0.5));
  CHECK_THROWS_AS(field_from_json(j, coarse), InvalidArgument);
}
