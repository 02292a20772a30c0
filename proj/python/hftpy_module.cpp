// Python bindings: a Session object whose methods return report dicts.

#include "hft/commands.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hft;

namespace {

py::object to_py(const json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict report(const Report& r) { return to_py(r.body); }

Session make_session(int depth, double base, const std::string& gauge, int q_check, const std::string& k,
                     const std::string& b, const std::string& config) {
    SessionConfig c;
    if (!config.empty()) c = load_session_toml(config, c);
    c.grid_depth = depth;
    c.grid_base = base;
    c.gauge = parse_gauge(gauge);
    c.q_check = q_check;
    c.k = k;
    c.b = b;
    return open_session(c);
}

}  // namespace

PYBIND11_MODULE(_hftpy, m) {
    m.doc() = "Hyperfinite Fourier transform over the Robinson-Colombeau ring";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Session>(m, "Session")
        .def(py::init(&make_session), py::arg("depth") = 12, py::arg("base") = 0.5, py::arg("gauge") = "identity",
             py::arg("q_check") = 6, py::arg("k") = "inv(rho)", py::arg("b") = "inv(rho)", py::arg("config") = "")
        .def_property_readonly("eps", [](const Session& s) {
            std::vector<double> v;
            for (const real& e : s.grid->eps) v.push_back(to_double(e));
            return v;
        })
        .def_property_readonly("hashes", [](const Session& s) {
            return py::dict(py::arg("grid") = s.grid_hash(), py::arg("gauge") = s.gauge_hash(),
                            py::arg("mollifier") = s.mollifier_hash(), py::arg("quadrature") = s.quadrature_hash(),
                            py::arg("config") = s.config_hash());
        })
        .def("net", [](const Session& s, const std::string& text) {
            GenNumber x = net_list(s, text).at(0);
            std::vector<double> v;
            for (const real& r : x.samples()) v.push_back(to_double(r));
            return v;
        })
        .def("classify", [](const Session& s, const std::string& text) { return report(classify_report(s, text)); })
        .def("transform", [](const Session& s, const std::string& f, const std::string& omega) {
            return report(transform_report(s, f, omega, false));
        }, py::arg("f"), py::arg("omega") = "0")
        .def("invert", [](const Session& s, const std::string& g, const std::string& x) {
            return report(transform_report(s, g, x, true));
        }, py::arg("g"), py::arg("x") = "0")
        .def("convolve", [](const Session& s, const std::string& f, const std::string& g, const std::string& hint,
                            const std::string& x) { return report(convolve_report(s, f, g, hint, x)); },
             py::arg("f"), py::arg("g"), py::arg("hint") = "40", py::arg("x") = "0")
        .def("solve_ode", [](const Session& s, const std::string& spec) {
            return report(solve_ode_report(s, spec, "<python>"));
        }, py::arg("spec"))
        .def("solve_pde", [](const Session& s, const std::string& kind, const std::string& spec) {
            return report(solve_pde_report(s, kind, spec, "<python>"));
        }, py::arg("kind"), py::arg("spec"))
        .def("verify", [](const Session& s, const std::string& suite, const std::string& f, const std::string& h,
                          const std::string& probes, const std::string& hint) {
            VerifyArgs a;
            a.suite = suite;
            a.f = f;
            a.h = h;
            a.probes = probes;
            a.hint = hint;
            return report(verify_report(s, a));
        }, py::arg("suite"), py::arg("f") = "gaussian", py::arg("h") = "", py::arg("probes") = "", py::arg("hint") = "40");
}
