// Batch runner for transfer-operator and ladder experiments.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ruelle/errors.hpp"
#include "ruelle/experiment.hpp"
#include "ruelle/io.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"ruelle: spectral thermodynamic-formalism experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (overrides output_dir and RUELLE_OUTPUT_ROOT)");

  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  validate->add_option("config", config_path, "JSON config file")->required();

  std::vector<std::string> dirs;
  std::string report_out = "report";
  auto* report = app.add_subcommand("report", "Merge completed runs into report.csv and report.json");
  report->add_option("dirs", dirs, "Run directories")->required();
  report->add_option("--out", report_out, "Directory for the merged table");

  auto* dump = app.add_subcommand("dump-alphabet", "Write the config's alphabet nodes and weights as CSV");
  dump->add_option("config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    std::optional<fs::path> out;
    if (!out_dir.empty()) out = fs::path(out_dir);
    return ruelle::run_command(config_path, seed, std::cerr, out);
  }
  if (*validate) return ruelle::validate_command(config_path, std::cout);

  try {
    if (*report) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      const auto table = ruelle::build_report(paths);
      ruelle::write_report(table, report_out);
      std::cerr << "report: " << table.rows.size() << " row(s) -> " << report_out << "\n";
      return 0;
    }
    if (*dump) {
      ruelle::dump_alphabet(ruelle::load_config(config_path), std::cout);
      return 0;
    }
  } catch (const ruelle::Error& e) {
    std::cerr << ruelle::io::dump_json({{"status", "error"}, {"kind", e.kind()}, {"message", e.what()}});
    return ruelle::exit_code_for(e);
  }
  return 1;
}
