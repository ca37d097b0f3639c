#pragma once

#include <chrono>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tmlab::cli {

/// Provenance block embedded in every file the CLI writes.
struct RunRecord {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::string mesh_hash;                      // surface id of the primary mesh
  std::map<std::string, std::string> inputs;  // path -> git-style content hash
  std::vector<std::string> outputs;
  std::optional<double> wall_time;  // seconds; left empty in deterministic mode

  nlohmann::json to_json() const;
};

/// Collects outputs in memory and writes them only after the command has
/// finished, each through a temp file and rename.
class OutputSet {
 public:
  void add(const std::string& path, std::string content) { files_.emplace_back(path, std::move(content)); }
  void commit() const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Throws InvalidArgument unless the directory of `path` exists.
void check_output_path(const std::string& path);

/// Canonical JSON document: format_version, run_record, then the payload keys.
std::string json_document(const RunRecord& rec, nlohmann::json payload);

/// Whitespace two-column text with a commented header.
std::string plot_document(const RunRecord& rec, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<double>& x, const std::vector<double>& y);

/// Canonical text of a real for CSV and plot files.
std::string real(double v);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace tmlab::cli
