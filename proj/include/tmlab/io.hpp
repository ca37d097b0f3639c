#pragma once

#include <json.hpp>
#include <string>

#include "tmlab/assembly.hpp"
#include "tmlab/surface.hpp"

namespace tmlab {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "tmlab 0.3.0";

/// JSON text with object keys sorted and every double printed with 17
/// significant digits, so equal values always give equal bytes.
std::string canonical_dump(const nlohmann::json& j, int indent = 1);

/// Write to `path + ".tmp"`, then rename over `path`.
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Hex digest in git blob style: sha1("blob <len>\0" + content).
std::string content_hash(const std::string& content);
std::string hex64(std::uint64_t v);

nlohmann::json domain_to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j);

nlohmann::json mesh_to_json(const Surface& s);
Surface mesh_from_json(const nlohmann::json& j);
void write_mesh(const std::string& path, const Surface& s);
Surface read_mesh(const std::string& path);

nlohmann::json field_to_json(const Field& u, const std::string& name);
Field field_from_json(const nlohmann::json& j, const FemSpace& space);

}  // namespace tmlab
