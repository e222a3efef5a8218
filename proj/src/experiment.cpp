#include "ruelle/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ruelle/alphabet.hpp"
#include "ruelle/calculus.hpp"
#include "ruelle/correlation.hpp"
#include "ruelle/heisenberg.hpp"
#include "ruelle/io.hpp"
#include "ruelle/rng.hpp"
#include "ruelle/thermo.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

bool contains(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Collects every validation problem instead of stopping at the first.
class Checker {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& what) { problems.push_back(path + ": " + what); }

  void allow(const Json& obj, const std::string& path, const std::vector<std::string>& keys) {
    for (const auto& [key, value] : obj.items())
      if (!contains(keys, key)) fail(child(path, key), "unknown field");
  }

  bool get_double(const Json& obj, const std::string& key, const std::string& path, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number() || !std::isfinite(it->get<double>())) {
      fail(child(path, key), "expected a finite number");
      return false;
    }
    out = it->get<double>();
    return true;
  }

  bool get_int(const Json& obj, const std::string& key, const std::string& path, long long& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_integer()) {
      fail(child(path, key), "expected an integer");
      return false;
    }
    out = it->get<long long>();
    return true;
  }

  template <class T>
  bool get_int_as(const Json& obj, const std::string& key, const std::string& path, T& out) {
    long long v = static_cast<long long>(out);
    if (!get_int(obj, key, path, v)) return false;
    out = static_cast<T>(v);
    return true;
  }

  bool get_bool(const Json& obj, const std::string& key, const std::string& path, bool& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_boolean()) {
      fail(child(path, key), "expected true or false");
      return false;
    }
    out = it->get<bool>();
    return true;
  }

  bool get_string(const Json& obj, const std::string& key, const std::string& path, std::string& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_string()) {
      fail(child(path, key), "expected a string");
      return false;
    }
    out = it->get<std::string>();
    return true;
  }

  bool get_int_list(const Json& obj, const std::string& key, const std::string& path, std::vector<int>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_array() || !std::all_of(it->begin(), it->end(), [](const Json& v) { return v.is_number_integer(); })) {
      fail(child(path, key), "expected a list of integers");
      return false;
    }
    out.clear();
    for (const auto& v : *it) out.push_back(v.get<int>());
    return true;
  }

  bool get_double_list(const Json& obj, const std::string& key, const std::string& path, std::vector<double>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_array() ||
        !std::all_of(it->begin(), it->end(), [](const Json& v) { return v.is_number() && std::isfinite(v.get<double>()); })) {
      fail(child(path, key), "expected a list of finite numbers");
      return false;
    }
    out.clear();
    for (const auto& v : *it) out.push_back(v.get<double>());
    return true;
  }

  void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) fail(path, what);
  }
};

// -- alphabets ------------------------------------------------------------

struct AlphabetShape {
  std::string kind;
  std::size_t dim = 0;
  double size = 0.0;  // 0 when unknown
};

AlphabetShape parse_alphabet(Checker& ck, Json& spec, const std::string& path, const NumericParams& params,
                             bool allow_window) {
  AlphabetShape shape;
  if (!spec.is_object()) {
    ck.fail(path, "expected an object with a \"kind\" field");
    return shape;
  }
  if (!ck.get_string(spec, "kind", path, shape.kind)) {
    if (!spec.contains("kind")) ck.fail(child(path, "kind"), "missing");
    return shape;
  }
  const auto& kind = shape.kind;
  if (kind == "finite") {
    ck.allow(spec, path, {"kind", "size"});
    long long n = 2;
    if (!ck.get_int(spec, "size", path, n) && !spec.contains("size")) ck.fail(child(path, "size"), "missing");
    ck.require(n >= 1, child(path, "size"), "must be >= 1");
    spec["size"] = n;
    shape.dim = 1;
    shape.size = static_cast<double>(n);
  } else if (kind == "circle") {
    ck.allow(spec, path, {"kind", "nodes"});
    long long n = 64;
    ck.get_int(spec, "nodes", path, n);
    ck.require(n >= 2, child(path, "nodes"), "must be >= 2");
    spec["nodes"] = n;
    shape.dim = 2;
    shape.size = static_cast<double>(n);
  } else if (kind == "sphere") {
    ck.allow(spec, path, {"kind", "polar", "azimuth"});
    long long np = 16;
    long long na = 32;
    ck.get_int(spec, "polar", path, np);
    ck.get_int(spec, "azimuth", path, na);
    ck.require(np >= 1, child(path, "polar"), "must be >= 1");
    ck.require(na >= 2, child(path, "azimuth"), "must be >= 2");
    spec["polar"] = np;
    spec["azimuth"] = na;
    shape.dim = 3;
    shape.size = static_cast<double>(np * na);
  } else if (kind == "octahedral") {
    ck.allow(spec, path, {"kind"});
    shape.dim = 3;
    shape.size = 6;
  } else if (kind == "chain-window") {
    if (!allow_window) {
      ck.fail(child(path, "kind"), "chain-window cannot be nested here");
      return shape;
    }
    ck.allow(spec, path, {"kind", "base", "window_radius", "beta"});
    long long w = params.window_radius;
    double beta = params.beta;
    ck.get_int(spec, "window_radius", path, w);
    ck.get_double(spec, "beta", path, beta);
    ck.require(w >= 0, child(path, "window_radius"), "must be >= 0");
    spec["window_radius"] = w;
    spec["beta"] = beta;
    if (!spec.contains("base")) {
      ck.fail(child(path, "base"), "missing");
      return shape;
    }
    const auto base = parse_alphabet(ck, spec["base"], child(path, "base"), params, false);
    if (!base.kind.empty() && base.dim != 3) ck.fail(child(path, "base.kind"), "base must be sphere or octahedral");
    shape.dim = 3 * static_cast<std::size_t>(2 * std::max(w, 0LL) + 1);
    shape.size = std::pow(base.size, static_cast<double>(2 * std::max(w, 0LL) + 1));
    if (shape.size > params.budget)
      ck.fail(path, "product alphabet size " + io::format_double(shape.size) + " exceeds budget " +
                        io::format_double(params.budget));
  } else {
    ck.fail(child(path, "kind"), "unknown alphabet \"" + kind + "\" (known: " + join(kAlphabetKinds, ", ") + ")");
  }
  return shape;
}

AlphabetPtr make_base_alphabet(const Json& spec) {
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "finite") return make_finite_alphabet(spec.at("size").get<std::size_t>());
  if (kind == "circle") return make_circle_alphabet(spec.at("nodes").get<std::size_t>());
  if (kind == "sphere") return make_sphere_alphabet(spec.at("polar").get<std::size_t>(), spec.at("azimuth").get<std::size_t>());
  if (kind == "octahedral") return make_octahedral_alphabet();
  throw InvalidArgument("unknown alphabet kind " + kind);
}

// -- potentials -----------------------------------------------------------

bool read_table_csv(Checker& ck, const fs::path& file, const std::string& path, int depth, double n_nodes,
                    std::vector<double>& values) {
  std::ifstream in(file);
  if (!in) {
    ck.fail(path, "cannot open " + file.string());
    return false;
  }
  const auto total = static_cast<std::size_t>(std::pow(n_nodes, depth));
  values.assign(total, std::numeric_limits<double>::quiet_NaN());
  std::string line;
  std::size_t line_no = 0;
  std::size_t filled = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    const auto loc = file.filename().string() + ":" + std::to_string(line_no);
    auto is_number = [](const std::string& s) {
      char* end = nullptr;
      std::strtod(s.c_str(), &end);
      return end != s.c_str();
    };
    if (line_no == 1 && !cells.empty() && !is_number(cells[0])) continue;  // header
    if (cells.size() != static_cast<std::size_t>(depth) + 1) {
      ck.fail(path, loc + ": expected " + std::to_string(depth + 1) + " columns");
      return false;
    }
    std::size_t index = 0;
    for (int j = 0; j < depth; ++j) {
      char* end = nullptr;
      const long long i = std::strtoll(cells[static_cast<std::size_t>(j)].c_str(), &end, 10);
      if (i < 0 || static_cast<double>(i) >= n_nodes) {
        ck.fail(path, loc + ": node index out of range");
        return false;
      }
      index = index * static_cast<std::size_t>(n_nodes) + static_cast<std::size_t>(i);
    }
    char* end = nullptr;
    const double v = std::strtod(cells.back().c_str(), &end);
    if (!std::isfinite(v)) {
      ck.fail(path, loc + ": value must be finite");
      return false;
    }
    if (std::isnan(values[index])) ++filled;
    values[index] = v;
  }
  if (filled != total) {
    ck.fail(path, "table covers " + std::to_string(filled) + " of " + std::to_string(total) + " cylinders");
    return false;
  }
  return true;
}

void parse_potential(Checker& ck, Json& spec, const std::string& path, const AlphabetShape& alphabet,
                     const NumericParams& params, const fs::path& base_dir) {
  if (!spec.is_object()) {
    ck.fail(path, "expected an object with a \"kind\" field");
    return;
  }
  std::string kind;
  if (!ck.get_string(spec, "kind", path, kind)) {
    if (!spec.contains("kind")) ck.fail(child(path, "kind"), "missing");
    return;
  }
  const bool known_alphabet = !alphabet.kind.empty();
  if (kind == "constant") {
    ck.allow(spec, path, {"kind", "value"});
    double v = 0.0;
    ck.get_double(spec, "value", path, v);
    spec["value"] = v;
  } else if (kind == "xy-nn" || kind == "sphere-nn" || kind == "dot") {
    const char* scale_key = kind == "dot" ? "scale" : "beta";
    ck.allow(spec, path, {"kind", scale_key});
    double s = kind == "dot" ? 1.0 : params.beta;
    ck.get_double(spec, scale_key, path, s);
    spec[scale_key] = s;
    if (known_alphabet) {
      if (kind == "xy-nn") ck.require(alphabet.kind == "circle", path, "xy-nn needs a circle alphabet");
      if (kind == "sphere-nn")
        ck.require(alphabet.kind == "sphere" || alphabet.kind == "octahedral", path, "sphere-nn needs a sphere alphabet");
      if (kind == "dot")
        ck.require(alphabet.dim == 2 || alphabet.dim == 3, path, "dot needs a circle or sphere alphabet");
    }
  } else if (kind == "coordinate" || kind == "coordinate-coupling") {
    const bool coupling = kind == "coordinate-coupling";
    ck.allow(spec, path,
             coupling ? std::vector<std::string>{"kind", "component", "field", "coupling"}
                      : std::vector<std::string>{"kind", "position", "component"});
    long long component = 0;
    ck.get_int(spec, "component", path, component);
    ck.require(component >= 0 && (!known_alphabet || component < static_cast<long long>(alphabet.dim)),
               child(path, "component"), "must index a node coordinate");
    spec["component"] = component;
    if (coupling) {
      double field = 0.0;
      double c = 0.0;
      ck.get_double(spec, "field", path, field);
      ck.get_double(spec, "coupling", path, c);
      spec["field"] = field;
      spec["coupling"] = c;
    } else {
      long long position = 1;
      ck.get_int(spec, "position", path, position);
      ck.require(position >= 1, child(path, "position"), "must be >= 1");
      spec["position"] = position;
    }
  } else if (kind == "custom-table") {
    ck.allow(spec, path, {"kind", "depth", "values", "file", "holder_alpha"});
    long long depth = 1;
    if (!ck.get_int(spec, "depth", path, depth) && !spec.contains("depth")) ck.fail(child(path, "depth"), "missing");
    ck.require(depth >= 1, child(path, "depth"), "must be >= 1");
    double a = kDefaultHolderAlpha;
    ck.get_double(spec, "holder_alpha", path, a);
    ck.require(a > 0.0 && a <= 1.0, child(path, "holder_alpha"), "must lie in (0, 1]");
    spec["holder_alpha"] = a;
    if (depth < 1 || !known_alphabet || alphabet.size <= 0) return;
    const double expected = std::pow(alphabet.size, static_cast<double>(depth));
    if (expected > params.budget) {
      ck.fail(path, "table size " + io::format_double(expected) + " exceeds budget");
      return;
    }
    std::vector<double> values;
    if (spec.contains("file")) {
      std::string file;
      if (ck.get_string(spec, "file", path, file)) {
        fs::path p(file);
        if (p.is_relative()) p = base_dir / p;
        if (read_table_csv(ck, p, child(path, "file"), static_cast<int>(depth), alphabet.size, values))
          spec["values"] = values;
      }
    } else if (ck.get_double_list(spec, "values", path, values)) {
      ck.require(static_cast<double>(values.size()) == expected, child(path, "values"),
                 "expected " + io::format_double(expected) + " entries (N^depth)");
    } else if (!spec.contains("values")) {
      ck.fail(path, "custom-table needs \"values\" or \"file\"");
    }
  } else if (kind == "heisenberg-ladder") {
    ck.allow(spec, path, {"kind", "alpha", "beta"});
    double alpha = params.alpha;
    double beta = params.beta;
    ck.get_double(spec, "alpha", path, alpha);
    ck.get_double(spec, "beta", path, beta);
    ck.require(alpha > 0.0, child(path, "alpha"), "must be > 0");
    spec["alpha"] = alpha;
    spec["beta"] = beta;
    if (known_alphabet) ck.require(alphabet.kind == "chain-window", path, "heisenberg-ladder needs a chain-window alphabet");
  } else {
    ck.fail(child(path, "kind"), "unknown potential \"" + kind + "\" (known: " + join(kPotentialKinds, ", ") + ")");
  }
}

// -- numeric parameters ---------------------------------------------------

void parse_params(Checker& ck, const Json& obj, NumericParams& p) {
  const std::string path = "params";
  if (!obj.is_object()) {
    ck.fail(path, "expected an object");
    return;
  }
  ck.allow(obj, path,
           {"beta", "alpha", "window_radius", "rows", "n_max", "tol", "finite_n", "fd_steps", "birkhoff_n",
            "claim1_max_n", "rpf_probe_n", "draws", "burn_in", "sweeps", "measure_every", "chains", "column",
            "dump_state", "mcmc", "budget"});
  ck.get_double(obj, "beta", path, p.beta);
  if (ck.get_double(obj, "alpha", path, p.alpha)) ck.require(p.alpha > 0.0, "params.alpha", "must be > 0");
  if (ck.get_int_as(obj, "window_radius", path, p.window_radius))
    ck.require(p.window_radius >= 0, "params.window_radius", "must be >= 0");
  if (ck.get_int_as(obj, "rows", path, p.rows)) ck.require(p.rows >= 2, "params.rows", "must be >= 2");
  if (ck.get_int_as(obj, "n_max", path, p.n_max)) ck.require(p.n_max >= 1, "params.n_max", "must be >= 1");
  if (ck.get_double(obj, "tol", path, p.tol)) ck.require(p.tol > 0.0, "params.tol", "must be > 0");
  if (ck.get_int_list(obj, "finite_n", path, p.finite_n))
    ck.require(std::all_of(p.finite_n.begin(), p.finite_n.end(), [](int n) { return n >= 1; }), "params.finite_n",
               "entries must be >= 1");
  if (ck.get_double_list(obj, "fd_steps", path, p.fd_steps))
    ck.require(!p.fd_steps.empty() && std::all_of(p.fd_steps.begin(), p.fd_steps.end(), [](double t) { return t > 0.0; }),
               "params.fd_steps", "must be a nonempty list of positive steps");
  if (ck.get_int_list(obj, "birkhoff_n", path, p.birkhoff_n))
    ck.require(std::all_of(p.birkhoff_n.begin(), p.birkhoff_n.end(), [](int n) { return n >= 1; }),
               "params.birkhoff_n", "entries must be >= 1");
  if (ck.get_int_as(obj, "claim1_max_n", path, p.claim1_max_n))
    ck.require(p.claim1_max_n >= 0, "params.claim1_max_n", "must be >= 0");
  if (ck.get_int_as(obj, "rpf_probe_n", path, p.rpf_probe_n))
    ck.require(p.rpf_probe_n >= 0, "params.rpf_probe_n", "must be >= 0");
  if (ck.get_int_as(obj, "draws", path, p.draws)) ck.require(p.draws >= 1, "params.draws", "must be >= 1");
  if (ck.get_int_as(obj, "burn_in", path, p.burn_in)) ck.require(p.burn_in >= 0, "params.burn_in", "must be >= 0");
  if (ck.get_int_as(obj, "sweeps", path, p.sweeps)) ck.require(p.sweeps >= 1, "params.sweeps", "must be >= 1");
  if (ck.get_int_as(obj, "measure_every", path, p.measure_every))
    ck.require(p.measure_every >= 1, "params.measure_every", "must be >= 1");
  if (ck.get_int_as(obj, "chains", path, p.chains)) ck.require(p.chains >= 1, "params.chains", "must be >= 1");
  ck.get_int_as(obj, "column", path, p.column);
  ck.get_bool(obj, "dump_state", path, p.dump_state);
  ck.get_bool(obj, "mcmc", path, p.mcmc);
  if (ck.get_double(obj, "budget", path, p.budget)) ck.require(p.budget > 0.0, "params.budget", "must be > 0");
}

Json params_json(const NumericParams& p) {
  return Json{{"beta", p.beta},
              {"alpha", p.alpha},
              {"window_radius", p.window_radius},
              {"rows", p.rows},
              {"n_max", p.n_max},
              {"tol", p.tol},
              {"finite_n", p.finite_n},
              {"fd_steps", p.fd_steps},
              {"birkhoff_n", p.birkhoff_n},
              {"claim1_max_n", p.claim1_max_n},
              {"rpf_probe_n", p.rpf_probe_n},
              {"draws", p.draws},
              {"burn_in", p.burn_in},
              {"sweeps", p.sweeps},
              {"measure_every", p.measure_every},
              {"chains", p.chains},
              {"column", p.column},
              {"dump_state", p.dump_state},
              {"mcmc", p.mcmc},
              {"budget", p.budget}};
}

Json core_json(const ExperimentConfig& c) {
  Json j{{"experiment", c.experiment}, {"seed", c.seed}};
  if (!c.alphabet.is_null()) j["alphabet"] = c.alphabet;
  if (!c.potential.is_null()) j["potential"] = c.potential;
  if (!c.phi.is_null()) j["phi"] = c.phi;
  if (!c.psi.is_null()) j["psi"] = c.psi;
  j["params"] = params_json(c.params);
  return j;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string default_output_dir(const ExperimentConfig& c) {
  return "runs/" + c.experiment + "-" + hex64(fnv1a(io::dump_json(core_json(c), -1)));
}

// -- artifacts ------------------------------------------------------------

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot write " + (dir_ / name).string());
    out.precision(17);
    return out;
  }

  void write_json(const std::string& name, const Json& value) {
    auto out = open(name);
    out << io::dump_json(value);
  }

  const std::vector<std::string>& files() const { return files_; }

  void remove_all() {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
    files_.clear();
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// Drops files recorded by an earlier run in the same directory.
void clear_previous(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return;
  Json m = Json::parse(in, nullptr, false);
  std::error_code ec;
  if (m.is_object() && m.contains("files") && m["files"].is_array())
    for (const auto& f : m["files"])
      if (f.is_string()) {
        const fs::path p(f.get<std::string>());
        if (p.is_relative() && p.filename() == p) fs::remove(dir / p, ec);
      }
  fs::remove(dir / "manifest.json", ec);
}

void write_grid_csv(Artifacts& art, const std::string& name, const CylinderGrid& grid, std::span<const double> values,
                    const std::string& column) {
  std::vector<std::string> header{"index"};
  for (int j = 1; j <= grid.depth; ++j) header.push_back("x" + std::to_string(j));
  header.push_back(column);
  auto out = art.open(name);
  io::CsvWriter csv(out, header);
  for (std::size_t i = 0; i < grid.size; ++i) {
    csv.cell(static_cast<long long>(i));
    for (auto t : grid.tuple(i)) csv.cell(static_cast<long long>(t));
    csv.cell(values[i]).end_row();
  }
}

Json potential_summary(const Potential& f) {
  return Json{{"name", f.name},
              {"depth", f.depth},
              {"holder_alpha", f.holder_alpha},
              {"holder_const", f.holder_const},
              {"tail_error", f.tail_error}};
}

Json eigen_summary(const TransferOperator& op, const EigenData& eig) {
  return Json{{"lambda", eig.lambda},
              {"log_lambda", eig.log_lambda},
              {"gap_ratio", eig.gap_ratio},
              {"iterations", eig.iterations},
              {"gap_iterations", eig.gap_iterations},
              {"residual_right", eig.residual_right},
              {"residual_left", eig.residual_left},
              {"alphabet_size", op.alphabet().size()},
              {"grid_depth", op.grid().depth},
              {"grid_size", op.grid().size},
              {"potential", potential_summary(op.potential())}};
}

PowerIterationOptions power_options(const ExperimentConfig& c, bool gap) {
  PowerIterationOptions o;
  o.tol = c.params.tol;
  o.compute_gap = gap;
  o.gap_seed = c.seed;
  return o;
}

Potential observable_or_unit(const ExperimentConfig& c, const ResolvedAlphabet& a, const Json& spec) {
  return spec.is_null() ? constant_potential(a.alphabet, 1.0) : build_potential(c, a, spec);
}

// -- drivers --------------------------------------------------------------

Json run_spectrum(const ExperimentConfig& c, Artifacts& art) {
  const auto a = build_alphabet(c);
  const TransferOperator op(build_potential(c, a, c.potential));
  const auto eig = power_iteration(op, power_options(c, true));
  Json r = eigen_summary(op, eig);
  write_grid_csv(art, "h.csv", op.grid(), eig.h.values, "h");
  write_grid_csv(art, "nu.csv", op.grid(), eig.nu, "nu");
  if (c.params.rpf_probe_n > 0) {
    const auto phi = grid_function(op.grid(), observable_or_unit(c, a, c.phi));
    const auto probe = rpf_convergence_probe(op, eig, phi, c.params.rpf_probe_n);
    auto out = art.open("rpf_probe.csv");
    io::CsvWriter csv(out, {"n", "sup_dev"});
    for (std::size_t n = 0; n < probe.size(); ++n) csv.cell(static_cast<long long>(n)).cell(probe[n]).end_row();
    r["rpf_probe_final"] = probe.back();
  }
  return r;
}

Json run_pressure(const ExperimentConfig& c, Artifacts& art) {
  const auto a = build_alphabet(c);
  const TransferOperator op(build_potential(c, a, c.potential));
  const auto eig = power_iteration(op, power_options(c, true));
  const auto rep = pressure_report(op, eig, c.params.finite_n);
  Json r = eigen_summary(op, eig);
  r["pressure"] = rep.pressure;
  r["entropy"] = rep.entropy;
  r["energy"] = rep.energy;
  r["finite_n_constant"] = rep.finite_n_constant;
  Json series = Json::array();
  auto out = art.open("finite_n.csv");
  io::CsvWriter csv(out, {"n", "sup_dev"});
  for (const auto& d : rep.finite_n_sup_dev) {
    csv.cell(static_cast<long long>(d.n)).cell(d.sup_dev).end_row();
    series.push_back(Json{{"n", d.n}, {"sup_dev", d.sup_dev}});
  }
  r["finite_n"] = series;
  return r;
}

Json run_deriv_check(const ExperimentConfig& c, Artifacts& art) {
  const auto a = build_alphabet(c);
  const auto f = build_potential(c, a, c.potential);
  const auto phi = build_potential(c, a, c.phi);
  const auto opts = power_options(c, false);
  const auto rep = derivative_report(f, phi, c.params.fd_steps, c.params.birkhoff_n, opts);
  const TransferOperator op(f);
  const auto eig = power_iteration(op, opts);

  Json r{{"analytic", rep.analytic},
         {"richardson", rep.richardson},
         {"richardson_rel_err", std::abs(rep.richardson - rep.analytic) / std::max(std::abs(rep.analytic), 1e-300)},
         {"richardson_order", rep.richardson_order},
         {"unit_derivative", pressure_derivative(op, eig, constant_potential(a.alphabet, 1.0))},
         {"pressure", eig.log_lambda}};
  {
    auto out = art.open("fd.csv");
    io::CsvWriter csv(out, {"step", "value"});
    Json fd = Json::array();
    for (const auto& p : rep.fd) {
      csv.cell(p.step).cell(p.value).end_row();
      fd.push_back(Json{{"step", p.step}, {"value", p.value}});
    }
    r["fd"] = fd;
  }
  if (!rep.birkhoff.empty()) {
    auto out = art.open("birkhoff.csv");
    io::CsvWriter csv(out, {"n", "sup_deviation"});
    for (const auto& d : rep.birkhoff) csv.cell(static_cast<long long>(d.n)).cell(d.sup_dev).end_row();
    r["birkhoff_final"] = rep.birkhoff.back().sup_dev;
  }
  if (c.params.claim1_max_n > 0) {
    auto out = art.open("claim1.csv");
    io::CsvWriter csv(out, {"n", "discrepancy"});
    double worst = 0.0;
    for (int n = 1; n <= c.params.claim1_max_n; ++n) {
      const double d = claim1_identity_check(op, eig, phi, n, c.params.budget);
      worst = std::max(worst, d);
      csv.cell(static_cast<long long>(n)).cell(d).end_row();
    }
    r["claim1_max_discrepancy"] = worst;
  }
  return r;
}

Json run_correlations(const ExperimentConfig& c, Artifacts& art) {
  const auto a = build_alphabet(c);
  const TransferOperator op(build_potential(c, a, c.potential));
  const auto eig = power_iteration(op, power_options(c, true));
  const auto phi = grid_function(op.grid(), build_potential(c, a, c.phi));
  const auto psi = grid_function(op.grid(), build_potential(c, a, c.psi));
  const auto values = correlation_series(op, eig, phi, psi, c.params.n_max);
  Json r = eigen_summary(op, eig);
  r["gap_tau"] = eig.gap_ratio;
  std::optional<DecayFit> fit;
  try {
    fit = decay_fit(values);
    r["fit"] = Json{{"K", fit->K}, {"tau", fit->tau}, {"K_ls", fit->K_ls}, {"residual", fit->residual},
                    {"points", fit->points}};
  } catch (const InsufficientData& e) {
    r["fit"] = nullptr;
    r["fit_error"] = e.what();
  }
  double max_abs = 0.0;
  auto out = art.open("correlation.csv");
  io::CsvWriter csv(out, {"n", "C", "abs_C", "bound"});
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double bound = fit ? fit->K * std::pow(fit->tau, static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
    csv.cell(static_cast<long long>(n)).cell(values[n]).cell(std::abs(values[n])).cell(bound).end_row();
    max_abs = std::max(max_abs, std::abs(values[n]));
  }
  r["max_abs_C"] = max_abs;
  return r;
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double stderr_() const {
    const double m = mean();
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - m * m);
    return std::sqrt(var * static_cast<double>(count) / static_cast<double>(std::max(1L, count - 1)) /
                     static_cast<double>(count));
  }
};

Json run_chain(const ExperimentConfig& c, Artifacts& art) {
  const auto& p = c.params;
  Rng master(c.seed);
  Rng kernel_rng = master.split();
  Rng chain_rng = master.split();
  const double exact = langevin(p.beta);

  MeanAccumulator kernel;
  const Vec3 north{0, 0, 1};
  for (long i = 0; i < p.draws; ++i) kernel.add(dot(north, sample_kernel(north, p.beta, kernel_rng)));

  const int w = (p.n_max + 1) / 2;
  std::vector<MeanAccumulator> corr(static_cast<std::size_t>(p.n_max));
  for (long i = 0; i < p.draws; ++i) {
    const auto chain = sample_chain(p.beta, w, chain_rng);
    for (int n = 1; n <= p.n_max; ++n) corr[static_cast<std::size_t>(n - 1)].add(dot(chain.at(-w), chain.at(-w + n)));
  }

  Json r{{"langevin", exact},
         {"kernel_mean", kernel.mean()},
         {"kernel_stderr", kernel.stderr_()},
         {"kernel_z", (kernel.mean() - exact) / kernel.stderr_()}};
  double worst_z = 0.0;
  auto out = art.open("chain.csv");
  io::CsvWriter csv(out, {"n", "estimate", "stderr", "exact", "z"});
  for (int n = 1; n <= p.n_max; ++n) {
    const auto& acc = corr[static_cast<std::size_t>(n - 1)];
    const double ex = std::pow(exact, n);
    const double z = (acc.mean() - ex) / acc.stderr_();
    worst_z = std::max(worst_z, std::abs(z));
    csv.cell(static_cast<long long>(n)).cell(acc.mean()).cell(acc.stderr_()).cell(ex).cell(z).end_row();
  }
  r["chain_max_abs_z"] = worst_z;
  return r;
}

LadderRunOptions ladder_options(const ExperimentConfig& c) {
  const auto& p = c.params;
  LadderRunOptions o;
  o.burn_in = p.burn_in;
  o.sweeps = p.sweeps;
  o.measure_every = p.measure_every;
  o.column = p.column;
  o.n_max = p.n_max;
  o.chains = p.chains;
  o.seed = c.seed;
  return o;
}

Json two_point_json(const TwoPointReport& tp) {
  return Json{{"K_beta", tp.K_beta},
              {"c_beta", tp.c_beta},
              {"c_err", tp.c_err},
              {"c_significance", tp.c_beta / tp.c_err},
              {"fit_points", tp.fit_points},
              {"g", tp.g},
              {"g_err", tp.g_err},
              {"one_point", tp.one_point},
              {"one_point_components", tp.one_point_components},
              {"one_point_err", tp.one_point_err},
              {"tau_int", tp.tau_int},
              {"ess", tp.ess},
              {"samples", tp.samples},
              {"chains", tp.chains}};
}

Json run_ladder_experiment(const ExperimentConfig& c, Artifacts& art) {
  const auto& p = c.params;
  Rng rng(c.seed);
  const auto initial = make_ladder_state(p.rows, p.window_radius, p.beta, p.alpha, rng);
  auto samples_out = art.open("samples.csv");
  io::CsvWriter samples_csv(samples_out, {"chain", "sweep", "energy", "overlap", "sx", "sy", "sz"});
  const auto samples = run_ladder(initial, ladder_options(c), [&](int chain, long sweep, double energy, double overlap, Vec3 s) {
    samples_csv.cell(static_cast<long long>(chain)).cell(static_cast<long long>(sweep)).cell(energy).cell(overlap);
    samples_csv.cell(s.x).cell(s.y).cell(s.z).end_row();
  });
  samples_out.close();
  const auto tp = two_point(samples);
  {
    auto out = art.open("two_point.csv");
    io::CsvWriter csv(out, {"n", "g", "g_err"});
    for (std::size_t i = 0; i < tp.g.size(); ++i)
      csv.cell(static_cast<long long>(tp.distances[i])).cell(tp.g[i]).cell(tp.g_err[i]).end_row();
  }
  if (p.dump_state) {
    auto out = art.open("state.csv");
    io::CsvWriter csv(out, {"chain", "row", "site", "x", "y", "z"});
    for (std::size_t ch = 0; ch < samples.final_states.size(); ++ch) {
      const auto& s = samples.final_states[ch];
      for (int i = 0; i < s.rows; ++i)
        for (int n = -s.window_radius; n <= s.window_radius; ++n) {
          const Vec3 v = s.at(i, n);
          csv.cell(static_cast<long long>(ch)).cell(static_cast<long long>(i + 1)).cell(static_cast<long long>(n));
          csv.cell(v.x).cell(v.y).cell(v.z).end_row();
        }
    }
  }
  return two_point_json(tp);
}

Json run_crosscheck(const ExperimentConfig& c, Artifacts& art) {
  const auto& p = c.params;
  const auto base = build_alphabet(c).alphabet;
  CrosscheckOptions opts;
  opts.tol = p.tol;
  opts.budget = static_cast<std::size_t>(p.budget);
  opts.rows = p.rows;
  if (p.mcmc) opts.mcmc = ladder_options(c);
  const auto x = ladder_operator_crosscheck(p.beta, p.alpha, p.window_radius, base, opts);
  Json r{{"pressure", x.pressure},
         {"lambda", x.lambda},
         {"gap_ratio", x.gap_ratio},
         {"log_partition", x.log_partition},
         {"alphabet_size", x.alphabet_size},
         {"mcmc_tau", x.mcmc_tau},
         {"mcmc_tau_err", x.mcmc_tau_err},
         {"agree", p.mcmc ? Json(x.agree) : Json(nullptr)}};
  if (p.window_radius == 0) {
    r["reference_pressure"] = p.beta == 0.0 ? 0.0 : std::log(std::sinh(p.beta) / p.beta);
    r["reference_gap"] = langevin(p.beta);
  }
  auto out = art.open("crosscheck.csv");
  io::CsvWriter csv(out, {"quantity", "operator", "mcmc"});
  csv.cell("tau").cell(x.gap_ratio).cell(x.mcmc_tau).end_row();
  return r;
}

void flatten(const std::string& prefix, const Json& v, std::map<std::string, Json>& row,
             std::vector<std::string>& order) {
  if (v.is_object()) {
    for (const auto& [k, item] : v.items()) flatten(prefix.empty() ? k : prefix + "." + k, item, row, order);
    return;
  }
  if (v.is_array()) return;
  if (!row.count(prefix)) order.push_back(prefix);
  row[prefix] = v;
}

}  // namespace

// -- public API -----------------------------------------------------------

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidArgument("invalid config: " + join(problems, "; ")), problems_(std::move(problems)) {}

Json ExperimentConfig::resolved() const {
  Json j = core_json(*this);
  j["output_dir"] = output_dir.empty() ? default_output_dir(*this) : output_dir;
  return j;
}

ExperimentConfig parse_config(const Json& doc_in, const fs::path& base_dir) {
  if (!doc_in.is_object()) throw ConfigError({"<root>: config must be a JSON object"});
  Checker ck;
  ExperimentConfig c;
  c.base_dir = base_dir;
  Json doc = doc_in;
  ck.allow(doc, "", {"experiment", "seed", "output_dir", "alphabet", "potential", "phi", "psi", "params"});
  if (!ck.get_string(doc, "experiment", "", c.experiment) && !doc.contains("experiment"))
    ck.fail("experiment", "missing");
  if (!c.experiment.empty() && !contains(kExperimentKinds, c.experiment))
    ck.fail("experiment", "unknown kind \"" + c.experiment + "\" (known: " + join(kExperimentKinds, ", ") + ")");
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned())
      c.seed = doc["seed"].get<std::uint64_t>();
    else
      ck.fail("seed", "expected a nonnegative integer");
  }
  ck.get_string(doc, "output_dir", "", c.output_dir);
  if (doc.contains("params")) parse_params(ck, doc["params"], c.params);

  const auto& kind = c.experiment;
  const auto& p = c.params;
  const bool operator_kind = kind == "spectrum" || kind == "pressure" || kind == "deriv-check" || kind == "correlations";
  const bool needs_alphabet = operator_kind || kind == "crosscheck";
  const bool needs_phi = kind == "deriv-check" || kind == "correlations";
  const bool allows_phi = needs_phi || kind == "spectrum";
  const bool needs_psi = kind == "correlations";
  const bool kind_known = contains(kExperimentKinds, kind);

  if (kind == "chain" || kind == "ladder" || kind == "crosscheck")
    ck.require(p.beta >= 0.0, "params.beta", "must be >= 0 for " + kind);
  if (kind == "ladder") {
    ck.require(p.n_max < p.rows, "params.n_max", "must be < params.rows");
    ck.require(std::abs(p.column) <= p.window_radius, "params.column", "must lie in [-W, W]");
  }
  if (kind == "crosscheck") {
    ck.require(p.window_radius == 0 || p.window_radius == 1, "params.window_radius", "crosscheck supports W = 0 or 1");
    if (p.mcmc) ck.require(p.n_max < p.rows, "params.n_max", "must be < params.rows");
  }
  if (kind == "deriv-check") ck.require(!p.fd_steps.empty(), "params.fd_steps", "must be nonempty");

  AlphabetShape shape;
  if (doc.contains("alphabet")) {
    if (kind_known && !needs_alphabet) ck.fail("alphabet", "not used by experiment " + kind);
    c.alphabet = doc["alphabet"];
    shape = parse_alphabet(ck, c.alphabet, "alphabet", p, kind != "crosscheck");
    if (kind == "crosscheck" && !shape.kind.empty())
      ck.require(shape.dim == 3, "alphabet.kind", "crosscheck needs a sphere or octahedral base");
  } else if (needs_alphabet) {
    ck.fail("alphabet", "missing");
  }

  const auto section = [&](const char* key, bool needed, bool allowed, Json& target) {
    if (doc.contains(key)) {
      if (kind_known && !allowed) {
        ck.fail(key, "not used by experiment " + kind);
        return;
      }
      target = doc[key];
      parse_potential(ck, target, key, shape, p, base_dir);
    } else if (needed) {
      ck.fail(key, "missing");
    }
  };
  section("potential", operator_kind, operator_kind, c.potential);
  section("phi", needs_phi, allows_phi, c.phi);
  section("psi", needs_psi, needs_psi, c.psi);

  if (!ck.problems.empty()) throw ConfigError(ck.problems);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open"});
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

ResolvedAlphabet build_alphabet(const ExperimentConfig& config) {
  const auto& spec = config.alphabet;
  if (spec.is_null()) throw InvalidArgument("build_alphabet: config has no alphabet");
  ResolvedAlphabet r;
  if (spec.at("kind") == "chain-window") {
    r.window = make_chain_window_alphabet(make_base_alphabet(spec.at("base")), spec.at("window_radius").get<int>(),
                                          spec.at("beta").get<double>(),
                                          static_cast<std::size_t>(config.params.budget));
    r.alphabet = r.window->alphabet;
  } else {
    r.alphabet = make_base_alphabet(spec);
  }
  return r;
}

Potential build_potential(const ExperimentConfig& config, const ResolvedAlphabet& a, const Json& spec) {
  (void)config;
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "constant") return constant_potential(a.alphabet, spec.at("value").get<double>());
  if (kind == "xy-nn" || kind == "sphere-nn") return dot_coupling_potential(a.alphabet, spec.at("beta").get<double>(), kind);
  if (kind == "dot") return dot_coupling_potential(a.alphabet, spec.at("scale").get<double>(), "dot");
  if (kind == "coordinate")
    return coordinate_observable(a.alphabet, spec.at("position").get<int>(), spec.at("component").get<std::size_t>());
  if (kind == "coordinate-coupling")
    return coordinate_coupling_potential(a.alphabet, spec.at("component").get<std::size_t>(),
                                         spec.at("field").get<double>(), spec.at("coupling").get<double>());
  if (kind == "custom-table")
    return table_potential(a.alphabet, spec.at("depth").get<int>(), spec.at("values").get<std::vector<double>>(),
                           "custom-table", spec.at("holder_alpha").get<double>());
  if (kind == "heisenberg-ladder") {
    if (!a.window) throw InvalidArgument("heisenberg-ladder needs a chain-window alphabet");
    auto f = scaled(heisenberg_potential(a.window, spec.at("alpha").get<double>()), spec.at("beta").get<double>());
    f.name = "heisenberg-ladder";
    return f;
  }
  throw InvalidArgument("unknown potential kind " + kind);
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a(io::dump_json(core_json(config), -1)); }

fs::path resolve_output_dir(const ExperimentConfig& config) {
  fs::path dir = config.output_dir.empty() ? fs::path(default_output_dir(config)) : fs::path(config.output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) dir = fs::path(root) / dir;
  }
  return dir;
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  clear_previous(out_dir);
  Artifacts art(out_dir);
  try {
    static const std::map<std::string, std::function<Json(const ExperimentConfig&, Artifacts&)>> drivers = {
        {"spectrum", run_spectrum}, {"pressure", run_pressure}, {"deriv-check", run_deriv_check},
        {"correlations", run_correlations}, {"chain", run_chain}, {"ladder", run_ladder_experiment},
        {"crosscheck", run_crosscheck}};
    const auto it = drivers.find(config.experiment);
    if (it == drivers.end()) throw InvalidArgument("unknown experiment " + config.experiment);
    Json result{{"experiment", config.experiment}, {"config_hash", hex64(config_hash(config))}, {"seed", config.seed}};
    const Json body = it->second(config, art);
    for (const auto& [k, v] : body.items()) result[k] = v;
    art.write_json("result.json", result);
    return {result, art.files()};
  } catch (...) {
    art.remove_all();
    throw;
  }
}

int exit_code_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "invalid-argument") return 2;
  if (k == "resource-limit") return 3;
  if (k == "non-convergence") return 4;
  if (k == "numerical-breakdown") return 5;
  if (k == "insufficient-data") return 6;
  return 1;
}

namespace {

Json versions() {
  return Json{{"ruelle", kVersion},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
              {"compiler", std::string("clang ") + __clang_version__},
#elif defined(__GNUC__)
              {"compiler", std::string("gcc ") + __VERSION__},
#else
              {"compiler", "unknown"},
#endif
              {"cxx_standard", static_cast<long>(__cplusplus)}};
}

Json error_record(const std::string& kind, const std::string& message) {
  return Json{{"status", "error"}, {"kind", kind}, {"message", message}};
}

Json error_record(const Error& e) {
  Json r = error_record(e.kind(), e.what());
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) r["problems"] = ce->problems();
  if (const auto* nc = dynamic_cast<const NonConvergence*>(&e)) {
    r["last_residual"] = nc->last_residual();
    r["iterations"] = nc->iterations();
  }
  if (const auto* rl = dynamic_cast<const ResourceLimit*>(&e)) {
    r["requested"] = rl->requested();
    r["budget"] = rl->budget();
  }
  return r;
}

}  // namespace

int run_command(const fs::path& config_path, std::optional<std::uint64_t> seed_override, std::ostream& log,
                std::optional<fs::path> out_override) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<fs::path> out = out_override;
  std::optional<ExperimentConfig> config;
  Json record;
  int status = 0;
  try {
    config = load_config(config_path);
    if (seed_override) config->seed = *seed_override;
    if (!out) out = resolve_output_dir(*config);
    auto rr = run_experiment(*config, *out);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json manifest{{"status", "ok"},
                  {"experiment", config->experiment},
                  {"seed", config->seed},
                  {"config_hash", hex64(config_hash(*config))},
                  {"config_path", config_path.string()},
                  {"config", config->resolved()},
                  {"versions", versions()},
                  {"wall_time_seconds", wall},
                  {"files", rr.files}};
    std::ofstream(*out / "manifest.json", std::ios::binary) << io::dump_json(manifest);
    log << "ok: " << config->experiment << " -> " << out->string() << "\n";
    return 0;
  } catch (const Error& e) {
    record = error_record(e);
    status = exit_code_for(e);
  } catch (const std::exception& e) {
    record = error_record("internal", e.what());
    status = 1;
  }
  // Config errors may leave no resolvable directory: fall back to a raw output_dir field.
  if (!out) {
    std::ifstream in(config_path);
    const Json doc = in ? Json::parse(in, nullptr, false, true) : Json();
    if (doc.is_object() && doc.contains("output_dir") && doc["output_dir"].is_string()) {
      fs::path dir(doc["output_dir"].get<std::string>());
      if (dir.is_relative())
        if (const char* root = std::getenv(kOutputRootEnv); root && *root) dir = fs::path(root) / dir;
      out = dir;
    }
  }
  record["config_path"] = config_path.string();
  if (out) {
    std::error_code ec;
    fs::create_directories(*out, ec);
    if (!ec) {
      clear_previous(*out);
      std::ofstream(*out / "error.json", std::ios::binary) << io::dump_json(record);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      Json manifest{{"status", "error"}, {"config_path", config_path.string()}};
      if (config) {
        manifest["experiment"] = config->experiment;
        manifest["seed"] = config->seed;
        manifest["config_hash"] = hex64(config_hash(*config));
        manifest["config"] = config->resolved();
      }
      manifest["versions"] = versions();
      manifest["wall_time_seconds"] = wall;
      manifest["files"] = Json::array({"error.json"});
      std::ofstream(*out / "manifest.json", std::ios::binary) << io::dump_json(manifest);
    }
  }
  log << io::dump_json(record);
  return status;
}

int validate_command(const fs::path& config_path, std::ostream& log) {
  try {
    const auto config = load_config(config_path);
    log << io::dump_json(config.resolved());
    return 0;
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) log << "error: " << p << "\n";
    return 2;
  }
}

void dump_alphabet(const ExperimentConfig& config, std::ostream& out) {
  write_alphabet_csv(out, *build_alphabet(config).alphabet);
}

ReportTable build_report(const std::vector<fs::path>& run_dirs) {
  ReportTable table;
  table.columns = {"config_hash", "run_dir", "experiment", "seed"};
  std::map<std::string, std::size_t> by_hash;
  for (const auto& dir : run_dirs) {
    std::ifstream mf(dir / "manifest.json");
    std::ifstream rf(dir / "result.json");
    if (!mf || !rf) continue;
    const Json manifest = Json::parse(mf, nullptr, false);
    const Json result = Json::parse(rf, nullptr, false);
    if (!manifest.is_object() || !result.is_object() || manifest.value("status", "") != "ok") continue;
    std::map<std::string, Json> row;
    std::vector<std::string> order;
    row["config_hash"] = manifest.value("config_hash", "");
    row["run_dir"] = dir.string();
    row["experiment"] = manifest.value("experiment", "");
    row["seed"] = manifest.contains("seed") ? manifest["seed"] : Json();
    if (manifest.contains("config")) {
      Json cfg = manifest["config"];
      cfg.erase("output_dir");
      cfg.erase("experiment");
      cfg.erase("seed");
      flatten("config", cfg, row, order);
    }
    Json res = result;
    res.erase("experiment");
    res.erase("config_hash");
    res.erase("seed");
    flatten("result", res, row, order);
    for (const auto& col : order)
      if (!contains(table.columns, col)) table.columns.push_back(col);
    const auto key = row["config_hash"].get<std::string>();
    if (const auto it = by_hash.find(key); it != by_hash.end()) {
      auto& existing = table.rows[it->second];
      for (auto& [k, v] : row)
        if (k != "run_dir") existing[k] = v;
    } else {
      by_hash[key] = table.rows.size();
      table.rows.push_back(std::move(row));
    }
  }
  if (table.rows.empty()) throw InsufficientData("report: no completed runs among the given directories");
  return table;
}

void write_report(const ReportTable& table, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream csv_out(out_dir / "report.csv", std::ios::binary);
  io::CsvWriter csv(csv_out, table.columns);
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json obj = Json::object();
    for (const auto& col : table.columns) {
      const auto it = row.find(col);
      const Json v = it == row.end() ? Json() : it->second;
      obj[col] = v;
      if (v.is_null())
        csv.cell("null");
      else if (v.is_number_float())
        csv.cell(v.get<double>());
      else if (v.is_number_integer())
        csv.cell(v.get<long long>());
      else if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") != std::string::npos) {
          std::string q = "\"";
          for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          s = q + "\"";
        }
        csv.cell(s);
      } else
        csv.cell(v.dump());
    }
    csv.end_row();
    rows.push_back(obj);
  }
  std::ofstream(out_dir / "report.json", std::ios::binary)
      << io::dump_json(Json{{"columns", table.columns}, {"rows", rows}});
}

}  // namespace ruelle
