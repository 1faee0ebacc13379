#pragma once

// Configuration-driven experiment runner behind the `wml` tool.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace wml {

/// Flat `key = value` lines under `[section]` headers; `#` starts a comment
/// line. Keys are addressed as "section.key" and kept in file order.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// The "config" object of a JSON summary.
  static ExperimentConfig from_json(const nlohmann::ordered_json& j);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ConfigInvalid
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, const std::string& value);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  /// Entries that determine the result; execution settings are left out.
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;    // overrides params.seed
  std::optional<std::size_t> threads;   // overrides params.threads and WML_THREADS
  std::optional<std::filesystem::path> out_dir;  // overrides output.dir
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 usage or config error, 2 bound violated
  nlohmann::ordered_json summary;
  std::string error;
  std::vector<std::filesystem::path> files;
};

/// Validates the config, runs the experiment, writes `<name>.json` (and
/// `<name>.csv` for sampled kinds) into the output directory.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Exact and brute-force discrepancy of a one-value-per-line file.
RunResult run_discrepancy_oracle(const std::filesystem::path& sequence_file);

/// Default worker count: WML_THREADS when set, else 1.
std::size_t default_threads();

}  // namespace wml
