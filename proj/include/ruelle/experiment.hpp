#pragma once

// Batch experiment runner: JSON configs, name registries for alphabets and
// potentials, per-kind drivers and the on-disk artifact layout
// (manifest.json, result.json, CSV series, error.json on failure).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruelle/errors.hpp"
#include "ruelle/potential.hpp"

namespace ruelle {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "RUELLE_OUTPUT_ROOT";

/// Validation failure listing every offending field path.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct NumericParams {
  double beta = 1.0;
  double alpha = 1.0;
  int window_radius = 0;
  int rows = 12;
  int n_max = 30;
  double tol = 1e-10;
  std::vector<int> finite_n = {64, 128, 256, 512, 1024, 2048};
  std::vector<double> fd_steps = {1e-2, 5e-3, 2.5e-3};
  std::vector<int> birkhoff_n = {25, 50, 100, 200};
  int claim1_max_n = 0;
  int rpf_probe_n = 0;
  long draws = 100'000;
  long burn_in = 20'000;
  long sweeps = 200'000;
  int measure_every = 5;
  int chains = 1;
  int column = 0;
  bool dump_state = false;
  bool mcmc = false;
  double budget = 1e6;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::string output_dir;
  Json alphabet;   // {"kind": ..., ...}
  Json potential;  // {"kind": ..., ...}
  Json phi;        // observable specs; null when unused
  Json psi;
  NumericParams params;
  std::filesystem::path base_dir;  // relative files (custom tables) resolve here

  /// Every field with defaults filled in; what the manifest records.
  Json resolved() const;
};

inline const std::vector<std::string> kExperimentKinds = {"spectrum", "correlations", "pressure", "deriv-check",
                                                          "chain",    "ladder",       "crosscheck"};
inline const std::vector<std::string> kAlphabetKinds = {"finite", "circle", "sphere", "octahedral", "chain-window"};
inline const std::vector<std::string> kPotentialKinds = {"constant",    "coordinate-coupling", "xy-nn",
                                                         "sphere-nn",   "heisenberg-ladder",   "custom-table",
                                                         "dot",         "coordinate"};

/// Parses and validates; throws ConfigError naming every bad field.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResolvedAlphabet {
  AlphabetPtr alphabet;
  ChainWindowPtr window;  // set for chain-window alphabets
};

ResolvedAlphabet build_alphabet(const ExperimentConfig& config);
Potential build_potential(const ExperimentConfig& config, const ResolvedAlphabet& alphabet, const Json& spec);

/// FNV-1a 64 of the canonical resolved config without output_dir.
std::uint64_t config_hash(const ExperimentConfig& config);

/// output_dir resolved against the output-root environment variable when relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

struct RunResult {
  Json result;
  std::vector<std::string> files;  // relative to the output directory
};

/// Runs the experiment and writes its artifacts into `out_dir`.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// The `run` subcommand: resolve, run, write manifest or error.json. Returns the
/// process exit status.
int run_command(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed_override,
                std::ostream& log, std::optional<std::filesystem::path> out_override = std::nullopt);

/// 0 on a valid config, otherwise prints every problem and returns 2.
int validate_command(const std::filesystem::path& config_path, std::ostream& log);

void dump_alphabet(const ExperimentConfig& config, std::ostream& out);

struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::map<std::string, Json>> rows;  // missing column = null
};

/// Merges completed runs keyed by config hash; throws InsufficientData when
/// none of the directories holds a completed run.
ReportTable build_report(const std::vector<std::filesystem::path>& run_dirs);
void write_report(const ReportTable& table, const std::filesystem::path& out_dir);

/// Process exit status for an error kind.
int exit_code_for(const Error& e);

}  // namespace ruelle
