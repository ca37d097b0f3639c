#include "run_record.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "tmlab/errors.hpp"
#include "tmlab/io.hpp"

namespace tmlab::cli {

using nlohmann::json;

json RunRecord::to_json() const {
  json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["mesh_hash"] = mesh_hash.empty() ? json(nullptr) : json(mesh_hash);
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["wall_time"] = wall_time ? json(*wall_time) : json(nullptr);
  j["tool_version"] = kToolVersion;
  return j;
}

void OutputSet::commit() const {
  for (const auto& [path, content] : files_) atomic_write(path, content);
}

void check_output_path(const std::string& path) {
  if (path.empty()) throw InvalidArgument("empty output path");
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty() && !std::filesystem::is_directory(dir))
    throw InvalidArgument("output directory '" + dir.string() + "' does not exist");
}

std::string json_document(const RunRecord& rec, json payload) {
  payload["format_version"] = kFormatVersion;
  payload["run_record"] = rec.to_json();
  return canonical_dump(payload);
}

std::string real(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string plot_document(const RunRecord& rec, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<double>& x, const std::vector<double>& y) {
  std::string out = "# format_version " + std::to_string(kFormatVersion) + "\n";
  out += "# run_record " + canonical_dump(rec.to_json(), 0);
  out += "# " + xlabel + " " + ylabel + "\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) out += real(x[i]) + " " + real(y[i]) + "\n";
  return out;
}

}  // namespace tmlab::cli
