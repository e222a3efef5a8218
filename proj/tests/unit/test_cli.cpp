#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/experiment.hpp"

using namespace ruelle;
namespace fs = std::filesystem;

namespace {

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& doc) {
  const auto p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

Json xy_pressure(const fs::path& out) {
  return Json{{"experiment", "pressure"},
              {"seed", 3},
              {"output_dir", out.string()},
              {"alphabet", {{"kind", "circle"}, {"nodes", 64}}},
              {"potential", {{"kind", "xy-nn"}}},
              {"params", {{"beta", 1.0}, {"finite_n", {16, 32}}}}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RUELLE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("defaults are filled in and recorded") {
  const auto c = parse_config(Json{{"experiment", "spectrum"},
                                    {"alphabet", {{"kind", "sphere"}}},
                                    {"potential", {{"kind", "sphere-nn"}}},
                                    {"params", {{"beta", 2.0}}}});
  const auto r = c.resolved();
  CHECK(r["alphabet"]["polar"] == 16);
  CHECK(r["potential"]["beta"] == 2.0);
  CHECK(r["params"]["tol"] == 1e-10);
  CHECK(r["output_dir"].get<std::string>().rfind("runs/spectrum-", 0) == 0);
}

TEST_CASE("validation lists every violated field") {
  const Json bad{{"experiment", "correlations"},
                 {"alphabet", {{"kind", "circle"}, {"nodes", 1}}},
                 {"potential", {{"kind", "no-such-potential"}}},
                 {"phi", {{"kind", "coordinate"}, {"component", 5}}},
                 {"params", {{"tol", -1e-3}, {"typo", 1}}}};
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto all = std::string(e.what());
    CHECK(all.find("params.tol") != std::string::npos);
    CHECK(all.find("params.typo") != std::string::npos);
    CHECK(all.find("alphabet.nodes") != std::string::npos);
    CHECK(all.find("potential.kind") != std::string::npos);
    CHECK(all.find("phi.component") != std::string::npos);
    CHECK(all.find("psi: missing") != std::string::npos);
    CHECK(e.problems().size() == 6);
  }
  CHECK_THROWS_AS(parse_config(Json{{"experiment", "spectrum"},
                                    {"alphabet", {{"kind", "finite"}, {"size", 3}}},
                                    {"potential", {{"kind", "xy-nn"}}}}),
                  ConfigError);
}

TEST_CASE("spectrum of the zero potential") {
  const auto dir = oracle::fresh_dir("spectrum_zero");
  const auto c = parse_config(Json{{"experiment", "spectrum"},
                                    {"alphabet", {{"kind", "finite"}, {"size", 3}}},
                                    {"potential", {{"kind", "constant"}, {"value", 0.0}}}});
  const auto r = run_experiment(c, dir);
  CHECK(r.result["lambda"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& f : r.files) CHECK(fs::exists(dir / f));
}

TEST_CASE("pressure of the circle XY model and reproducible bytes") {
  const auto dir = oracle::fresh_dir("xy_pressure");
  const auto cfg = write_config(dir, "cfg.json", xy_pressure(dir / "run"));
  std::ostringstream log;
  REQUIRE(run_command(cfg, std::nullopt, log) == 0);
  const auto res = read_json(dir / "run" / "result.json");
  CHECK(res["pressure"].get<double>() == doctest::Approx(std::log(oracle::bessel_i(0, 1.0))).epsilon(1e-12));
  const auto manifest = read_json(dir / "run" / "manifest.json");
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config"]["params"]["beta"] == 1.0);

  // every file is listed in the manifest, nothing else lies around
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
  for (const auto& e : fs::directory_iterator(dir / "run"))
    if (e.path().filename() != "manifest.json") CHECK(listed.count(e.path().filename().string()) == 1);

  const auto first = oracle::slurp(dir / "run" / "result.json");
  const auto first_csv = oracle::slurp(dir / "run" / "finite_n.csv");
  REQUIRE(run_command(cfg, std::nullopt, log) == 0);
  CHECK(oracle::slurp(dir / "run" / "result.json") == first);
  CHECK(oracle::slurp(dir / "run" / "finite_n.csv") == first_csv);
}

TEST_CASE("failed runs leave a machine-readable error record") {
  const auto dir = oracle::fresh_dir("bad_run");
  Json doc = xy_pressure(dir / "run");
  doc["params"]["tol"] = -1.0;
  const auto cfg = write_config(dir, "cfg.json", doc);
  std::ostringstream log;
  CHECK(run_command(cfg, std::nullopt, log) == 2);
  const auto err = read_json(dir / "run" / "error.json");
  CHECK(err["kind"] == "invalid-argument");
  CHECK(err["problems"][0].get<std::string>().find("params.tol") != std::string::npos);
  CHECK(!fs::exists(dir / "run" / "result.json"));

  // numerical failure: branch budget exceeded in the Birkhoff identity check
  Json deriv{{"experiment", "deriv-check"},
             {"output_dir", (dir / "run2").string()},
             {"alphabet", {{"kind", "circle"}, {"nodes", 16}}},
             {"potential", {{"kind", "xy-nn"}}},
             {"phi", {{"kind", "dot"}}},
             {"params", {{"claim1_max_n", 6}, {"birkhoff_n", Json::array()}}}};
  CHECK(run_command(write_config(dir, "d.json", deriv), std::nullopt, log) == 3);
  CHECK(read_json(dir / "run2" / "error.json")["kind"] == "resource-limit");
  const auto m = read_json(dir / "run2" / "manifest.json");
  CHECK(m["files"].size() == 1);
}

TEST_CASE("custom table from csv") {
  const auto dir = oracle::fresh_dir("custom_table");
  std::ofstream(dir / "table.csv") << "i1,i2,value\n0,0,0.5\n0,1,-0.5\n1,0,0.25\n1,1,1.0\n";
  Json doc{{"experiment", "spectrum"},
           {"alphabet", {{"kind", "finite"}, {"size", 2}}},
           {"potential", {{"kind", "custom-table"}, {"depth", 2}, {"file", "table.csv"}}}};
  const auto c = parse_config(doc, dir);
  CHECK(c.potential["values"].size() == 4);
  const auto r = run_experiment(c, dir / "out");
  // 2x2 matrix oracle: M[x][a] = 0.5 e^{f(a,x)}
  const double a = 0.5 * std::exp(0.5), b = 0.5 * std::exp(0.25), cc = 0.5 * std::exp(-0.5), d = 0.5 * std::exp(1.0);
  const double tr = a + d, det = a * d - b * cc;
  CHECK(r.result["lambda"].get<double>() == doctest::Approx(0.5 * (tr + std::sqrt(tr * tr - 4 * det))));
  std::ofstream(dir / "short.csv") << "0,0,1\n";
  doc["potential"]["file"] = "short.csv";
  CHECK_THROWS_AS(parse_config(doc, dir), ConfigError);
}

TEST_CASE("report merges runs by config hash with explicit nulls") {
  const auto dir = oracle::fresh_dir("report");
  std::ostringstream log;
  REQUIRE(run_command(write_config(dir, "a.json", xy_pressure(dir / "a")), std::nullopt, log) == 0);
  Json chain{{"experiment", "chain"}, {"output_dir", (dir / "b").string()}, {"params", {{"draws", 2000}, {"n_max", 3}}}};
  REQUIRE(run_command(write_config(dir, "b.json", chain), std::nullopt, log) == 0);
  // same config twice collapses to one row
  REQUIRE(run_command(write_config(dir, "a2.json", xy_pressure(dir / "a2")), std::nullopt, log) == 0);

  const auto single = build_report({dir / "a"});
  CHECK(single.rows.size() == 1);

  const auto table = build_report({dir / "a", dir / "b", dir / "a2", dir / "missing"});
  CHECK(table.rows.size() == 2);
  write_report(table, dir / "rep");
  const auto rep = read_json(dir / "rep" / "report.json");
  bool saw_null = false;
  for (const auto& row : rep["rows"]) {
    CHECK(row.size() == table.columns.size());
    if (row["experiment"] == "chain") saw_null = row["result.pressure"].is_null();
  }
  CHECK(saw_null);
  CHECK_THROWS_AS(build_report({dir / "missing"}), InsufficientData);
}

TEST_CASE("command line binary") {
  const auto dir = oracle::fresh_dir("cli_binary");
  const Json doc{{"experiment", "spectrum"},
                 {"output_dir", "spec"},
                 {"alphabet", {{"kind", "circle"}, {"nodes", 16}}},
                 {"potential", {{"kind", "xy-nn"}}}};
  const auto cfg = write_config(dir, "cfg.json", doc);
  const std::string env = "RUELLE_OUTPUT_ROOT=" + (dir / "root").string() + " ";
  CHECK(run_cli("validate " + cfg.string()) == 0);
  CHECK(std::system((env + RUELLE_CLI_PATH + " run " + cfg.string() + " --seed 9 >/dev/null 2>&1").c_str()) == 0);
  const auto m = read_json(dir / "root" / "spec" / "manifest.json");
  CHECK(m["seed"] == 9);
  CHECK(run_cli("dump-alphabet " + cfg.string()) == 0);
  CHECK(run_cli("report " + (dir / "root" / "spec").string() + " --out " + (dir / "rep").string()) == 0);
  CHECK(fs::exists(dir / "rep" / "report.csv"));
  CHECK(run_cli("report " + (dir / "nothing").string() + " --out " + (dir / "rep2").string()) == 6);
  Json bad = doc;
  bad["params"] = {{"tol", 0.0}};
  CHECK(run_cli("validate " + write_config(dir, "bad.json", bad).string()) == 2);
}
