#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdplab {

inline constexpr const char* kVersion = "0.1.0";

enum class Task { check, simulate, blocks, rate };
Task parse_task(const std::string& tag);
std::string to_string(Task t);

struct ConfigViolation {
  std::string pointer;  // JSON pointer, "" for the document root
  std::string message;
};

/// Every violation found while validating a config, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> v);
  [[nodiscard]] const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

struct ExperimentConfig {
  Task task = Task::check;
  nlohmann::json model;  // array_models schema, with speed and n_grid merged in
  nlohmann::json speed;
  std::vector<long long> n_grid;
  nlohmann::json params = nlohmann::json::object();  // the section named after the task
  std::filesystem::path output;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;  // duplicate keys and other non-fatal findings
  nlohmann::json document;            // as parsed (duplicate keys: the last one wins)

  /// fnv1a of the canonical dump (keys sorted), as 16 hex digits.
  [[nodiscard]] std::string digest() const;
};

/// Parses and validates. `task` overrides the document's "task"; a document
/// holding only a path ("knots" at the root) is accepted for the rate task.
/// Throws std::runtime_error for unreadable files and ConfigError otherwise.
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Task> task = std::nullopt,
                             std::optional<std::uint64_t> seed = std::nullopt);
ExperimentConfig parse_config(const std::string& text, std::optional<Task> task = std::nullopt,
                              std::optional<std::uint64_t> seed = std::nullopt);

struct TaskResult {
  nlohmann::json report;              // report.json body, deterministic
  std::string csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  bool failed = false;                // a checker returned "fail"
  std::vector<std::string> failures;  // one JSON line per failing condition
  std::string stdout_text;
};

TaskResult run_task(const ExperimentConfig& cfg);

struct RunManifest {
  std::string config_digest;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string started, finished;  // ISO 8601 UTC
  std::vector<std::string> outputs;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Writes report.json, report.csv and manifest.json into out_dir; returns
/// the written paths. IO failures name the offending path.
std::vector<std::filesystem::path> write_report(const TaskResult& result, RunManifest manifest,
                                                const std::filesystem::path& out_dir);

/// mdplab <check|simulate|blocks|rate> --config FILE [--out DIR] [--seed N] [--threads N]
/// Exit codes: 0 success, 1 a checker failed, 2 usage or config error.
int run_command(int argc, const char* const* argv);
int run_command(const std::vector<std::string>& args);

}  // namespace mdplab
