#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <optional>
#include <sstream>

#include "ruelle/alphabet.hpp"
#include "ruelle/calculus.hpp"
#include "ruelle/correlation.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/experiment.hpp"
#include "ruelle/heisenberg.hpp"
#include "ruelle/potential.hpp"
#include "ruelle/rng.hpp"
#include "ruelle/thermo.hpp"
#include "ruelle/transfer.hpp"

namespace py = pybind11;
using namespace ruelle;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_ruelle, m) {
  m.doc() = "Discretized Ruelle operators, pressure and Heisenberg ladder sampling";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "RuelleError");

  py::class_<Alphabet, std::shared_ptr<Alphabet>>(m, "Alphabet")
      .def_property_readonly("name", &Alphabet::name)
      .def_property_readonly("size", &Alphabet::size)
      .def_property_readonly("dim", &Alphabet::dim)
      .def_property_readonly("diameter", &Alphabet::diameter)
      .def_property_readonly("weights", [](const Alphabet& a) {
        return to_array(std::vector<double>(a.weights().begin(), a.weights().end()));
      })
      .def_property_readonly("nodes", [](const Alphabet& a) {
        py::array_t<double> out({a.size(), a.dim()});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < a.size(); ++i)
          for (std::size_t c = 0; c < a.dim(); ++c) v(i, c) = a.node(i)[c];
        return out;
      })
      .def("distance", &Alphabet::distance);

  const auto unconst = [](AlphabetPtr a) { return std::const_pointer_cast<Alphabet>(a); };
  m.def("finite_alphabet", [=](std::size_t n) { return unconst(make_finite_alphabet(n)); });
  m.def("circle_alphabet", [=](std::size_t n) { return unconst(make_circle_alphabet(n)); });
  m.def("sphere_alphabet", [=](std::size_t p, std::size_t a) { return unconst(make_sphere_alphabet(p, a)); },
        py::arg("n_polar"), py::arg("n_azimuth"));
  m.def("octahedral_alphabet", [=] { return unconst(make_octahedral_alphabet()); });

  py::class_<ChainWindowAlphabet, std::shared_ptr<ChainWindowAlphabet>>(m, "ChainWindowAlphabet")
      .def_property_readonly("alphabet", [=](const ChainWindowAlphabet& w) { return unconst(w.alphabet); })
      .def_readonly("window_radius", &ChainWindowAlphabet::window_radius)
      .def_readonly("beta", &ChainWindowAlphabet::beta)
      .def_readonly("log_partition", &ChainWindowAlphabet::log_partition);
  m.def(
      "chain_window_alphabet",
      [](std::shared_ptr<Alphabet> base, int w, double beta) {
        return std::const_pointer_cast<ChainWindowAlphabet>(make_chain_window_alphabet(base, w, beta));
      },
      py::arg("base"), py::arg("window_radius"), py::arg("beta"));

  py::class_<Potential>(m, "Potential")
      .def_readonly("depth", &Potential::depth)
      .def_readonly("holder_alpha", &Potential::holder_alpha)
      .def_readonly("holder_const", &Potential::holder_const)
      .def_readonly("tail_error", &Potential::tail_error)
      .def_readonly("name", &Potential::name)
      .def("__call__", [](const Potential& f, const std::vector<std::size_t>& x) {
        if (x.size() < static_cast<std::size_t>(f.depth)) throw InvalidArgument("need at least depth indices");
        return f(x);
      });

  m.def("constant_potential", [](std::shared_ptr<Alphabet> a, double c) { return constant_potential(a, c); });
  m.def(
      "table_potential",
      [](std::shared_ptr<Alphabet> a, int depth, std::vector<double> values) {
        return table_potential(a, depth, std::move(values));
      },
      py::arg("alphabet"), py::arg("depth"), py::arg("values"));
  m.def("dot_coupling_potential", [](std::shared_ptr<Alphabet> a, double beta) { return dot_coupling_potential(a, beta); },
        py::arg("alphabet"), py::arg("beta"));
  m.def("coordinate_observable",
        [](std::shared_ptr<Alphabet> a, int position, std::size_t c) { return coordinate_observable(a, position, c); },
        py::arg("alphabet"), py::arg("position"), py::arg("component"));
  m.def("heisenberg_potential",
        [](std::shared_ptr<ChainWindowAlphabet> w, double alpha) { return heisenberg_potential(w, alpha); });
  m.def("scaled", &scaled);
  m.def("shifted", &shifted);
  m.def("linear_combination", &linear_combination);

  py::class_<EigenData>(m, "EigenData")
      .def_readonly("lam", &EigenData::lambda)
      .def_readonly("log_lambda", &EigenData::log_lambda)
      .def_readonly("gap_ratio", &EigenData::gap_ratio)
      .def_readonly("iterations", &EigenData::iterations)
      .def_readonly("residual_right", &EigenData::residual_right)
      .def_readonly("residual_left", &EigenData::residual_left)
      .def_property_readonly("h", [](const EigenData& e) { return to_array(e.h.values); })
      .def_property_readonly("nu", [](const EigenData& e) { return to_array(e.nu); });

  py::class_<TransferOperator>(m, "TransferOperator")
      .def(py::init<Potential>())
      .def_property_readonly("grid_size", [](const TransferOperator& op) { return op.grid().size; })
      .def_property_readonly("grid_depth", [](const TransferOperator& op) { return op.grid().depth; })
      .def("apply",
           [](const TransferOperator& op, const std::vector<double>& in) {
             if (in.size() != op.grid().size) throw InvalidArgument("apply: length must equal grid_size");
             std::vector<double> out(in.size());
             op.apply(in, out);
             return to_array(out);
           })
      .def("dense_matrix", [](const TransferOperator& op) {
        const auto d = op.dense_matrix();
        const auto s = op.grid().size;
        py::array_t<double> out({s, s});
        std::copy(d.begin(), d.end(), out.mutable_data());
        return out;
      });

  m.def(
      "power_iteration",
      [](const TransferOperator& op, double tol, bool compute_gap) {
        PowerIterationOptions o;
        o.tol = tol;
        o.compute_gap = compute_gap;
        return power_iteration(op, o);
      },
      py::arg("op"), py::arg("tol") = 1e-10, py::arg("compute_gap") = true);

  m.def("pressure", [](const Potential& f, double tol) {
    PowerIterationOptions o;
    o.tol = tol;
    return pressure(f, o);
  }, py::arg("f"), py::arg("tol") = 1e-10);
  m.def("entropy", &entropy);
  m.def("pressure_derivative", &pressure_derivative);
  m.def(
      "finite_n_deviation",
      [](const TransferOperator& op, double p, const std::vector<int>& ns) {
        std::vector<double> out;
        for (const auto& d : finite_n_deviation(op, p, ns)) out.push_back(d.sup_dev);
        return out;
      });
  m.def(
      "derivative_report",
      [](const Potential& f, const Potential& phi, const std::vector<double>& steps) {
        const auto r = derivative_report(f, phi, steps);
        py::dict d;
        d["analytic"] = r.analytic;
        d["richardson"] = r.richardson;
        d["richardson_order"] = r.richardson_order;
        return d;
      },
      py::arg("f"), py::arg("phi"), py::arg("steps") = kDefaultFdSteps);
  m.def(
      "correlation_series",
      [](const TransferOperator& op, const EigenData& eig, const Potential& phi, const Potential& psi, int n_max) {
        return to_array(correlation_series(op, eig, grid_function(op.grid(), phi), grid_function(op.grid(), psi), n_max));
      },
      py::arg("op"), py::arg("eig"), py::arg("phi"), py::arg("psi"), py::arg("n_max"));

  m.def("langevin", &langevin);
  m.def(
      "sample_kernel",
      [](std::array<double, 3> s, double beta, std::size_t count, std::uint64_t seed) {
        Rng rng(seed);
        py::array_t<double> out({count, std::size_t{3}});
        auto v = out.mutable_unchecked<2>();
        const Vec3 axis{s[0], s[1], s[2]};
        for (std::size_t i = 0; i < count; ++i) {
          const Vec3 t = sample_kernel(axis, beta, rng);
          v(i, 0) = t.x;
          v(i, 1) = t.y;
          v(i, 2) = t.z;
        }
        return out;
      },
      py::arg("s"), py::arg("beta"), py::arg("count"), py::arg("seed") = 1);

  m.def(
      "run_config",
      [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
        std::ostringstream log;
        std::optional<std::filesystem::path> out_path;
        if (out) out_path = *out;
        const int status = run_command(path, seed, log, out_path);
        return py::make_tuple(status, log.str());
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none());
}
