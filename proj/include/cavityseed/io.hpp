#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cavityseed/scenarios.hpp"

namespace cavityseed {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kCodeVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "CAVITYSEED_OUT_DIR";
inline constexpr std::string_view kDefaultOutputDir = "cavityseed-out";

/// Filesystem failure while writing or reading a bundle.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully validated run description. `scenarios` holds the resolved members
/// (overrides, scaling and seeds applied); everything else is bookkeeping.
struct RunConfig {
  std::string source;  // catalog name, "inline" or "manifest"
  ScenarioSet scenarios;
  std::optional<std::uint64_t> master_seed;
  std::filesystem::path output_dir;
  ScaleOverrides scale;
  int workers = 0;
  bool force = false;
  // field -> "default" | "user" | "cli"
  std::map<std::string, std::string> provenance;
};

/// Command-line overrides layered on top of a config document.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> workers;
  std::optional<double> scale_ensemble;
  std::optional<double> scale_time;
  std::optional<double> scale_atoms;
  bool force = false;
};

/// Parses and validates a JSON run configuration. Throws ConfigError with
/// the offending field path on malformed syntax, unknown fields or
/// out-of-range values.
RunConfig parse_config(std::string_view text, const CliOverrides& cli = {});

/// Config for a bare catalog name.
RunConfig config_for_scenario(std::string_view name, const CliOverrides& cli = {});

/// The replayable part of a run: resolving this document again yields the
/// same scenarios.
nlohmann::json config_echo(const RunConfig& config);

// Round-trip-safe shortest decimal representation of a double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

struct MemberResult {
  const Scenario* scenario = nullptr;
  const EnsembleResult* result = nullptr;
};

struct OutputBundle {
  std::filesystem::path root;
  std::vector<std::filesystem::path> files;  // relative to root, sorted
};

/// Fails (ConfigError) if the output directory exists, is non-empty and
/// config.force is not set.
void check_output_dir(const RunConfig& config);

/// Writes one member's files under root/<member name>/.
std::vector<std::filesystem::path> write_member(const std::filesystem::path& root,
                                                const Scenario& scenario,
                                                const EnsembleResult& result);

/// Writes the whole bundle: manifest.json, run_info.json and every member.
OutputBundle write_outputs(const RunConfig& config,
                           const std::vector<MemberResult>& members,
                           double wall_time_seconds);

/// Runs every member of the config and writes the bundle.
OutputBundle run_config(const RunConfig& config);

}  // namespace cavityseed
