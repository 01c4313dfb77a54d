// Python bindings for the holo core library.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <vector>

#include "holo/errors.hpp"
#include "holo/experiments.hpp"

namespace py = pybind11;
using namespace holo;

namespace {

constexpr double kMHz = kTwoPi;

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::dict table_dict(const ResultTable& t) {
    py::array_t<double> rows({t.rows.size(), t.columns.size()});
    auto r = rows.mutable_unchecked<2>();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) r(i, j) = t.rows[i][j];
    }
    py::dict d;
    d["columns"] = t.columns;
    d["rows"] = rows;
    d["metadata"] = t.metadata;
    return d;
}

PulseKind parse_pulse(const std::string& s) {
    if (s == "ohqc") return PulseKind::Ohqc;
    if (s == "nhqc") return PulseKind::Nhqc;
    throw ModelError("pulse must be 'ohqc' or 'nhqc'");
}

SystemModel gate_model(std::size_t n_controls, const std::string& pulse, double omega_max_mhz, double control_amp_mhz,
                       double theta, double phi, double gamma) {
    GateModelConfig g;
    g.n_controls = n_controls;
    g.pulse = parse_pulse(pulse);
    g.omega_max = omega_max_mhz * kMHz;
    g.control_amp = control_amp_mhz * kMHz;
    g.theta = theta;
    g.phi = phi;
    g.gamma = gamma;
    return make_gate_model(g);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiqubit Rydberg holonomic gate simulator";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);

    m.def("list_scenarios", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : scenario_catalog()) out.emplace_back(s.name, s.summary);
        return out;
    }, "(name, summary) of every scenario.");

    m.def("validate_config", [](const std::string& text) {
        const auto c = validate_config(text);
        py::dict d;
        d["canonical"] = c.canonical;
        d["hash"] = config_hash(c);
        d["warnings"] = c.warnings;
        return d;
    }, py::arg("config_json"), "Resolved config, hash and warnings; raises ConfigError.");

    m.def("run_scenario", [](const std::string& text) {
        const auto c = validate_config(text);
        ResultTable t;
        {
            py::gil_scoped_release release;
            t = run_scenario(c);
        }
        return table_dict(t);
    }, py::arg("config_json"), "Runs a scenario; returns columns, rows (2-D array) and metadata.");

    m.def("interaction_mhz", [](double r_um, double c6_ghz_um6) { return c6_ghz_um6 * 1e3 / std::pow(r_um, 6); },
          py::arg("r_um"), py::arg("c6_ghz_um6") = kRb70sC6 / kMHz * 1e-3, "C6 / R^6 in MHz (ordinary frequency).");

    m.def("sensitivity", [](double a1, double a2) { return pulse::sensitivity(a1, a2); }, py::arg("a1"), py::arg("a2"));
    m.def("area_product", &pulse::area_product, py::arg("a1"), py::arg("a2"), "T * max Omega_t.");

    m.def("waveform", [](const std::string& kind, double omega_max_mhz, double a1, double a2, std::size_t points) {
        const auto w = make_waveform(parse_pulse(kind), omega_max_mhz * kMHz, a1, a2);
        const auto s = pulse::sample_waveform(w, points);
        py::dict d;
        d["t_us"] = to_array(s.times);
        std::vector<double> om, de;
        for (double x : s.omega) om.push_back(x / kMHz);
        for (double x : s.delta) de.push_back(x / kMHz);
        d["omega_MHz"] = to_array(om);
        d["delta_MHz"] = to_array(de);
        return d;
    }, py::arg("kind") = "ohqc", py::arg("omega_max_mhz") = 1.0, py::arg("a1") = 0.28, py::arg("a2") = -0.12,
       py::arg("points") = 501, "Target Rabi frequency and detuning samples.");

    m.def("gate_fidelity", [](std::size_t n_controls, const std::string& pulse, const std::string& propagation,
                              double omega_max_mhz, double control_amp_mhz, double theta, double phi, double gamma) {
        const SystemModel model = gate_model(n_controls, pulse, omega_max_mhz, control_amp_mhz, theta, phi, gamma);
        Propagation p;
        if (propagation == "full") {
            p = Propagation::Full;
        } else if (propagation == "effective") {
            p = Propagation::Effective;
        } else {
            throw ModelError("propagation must be 'full' or 'effective'");
        }
        py::gil_scoped_release release;
        return gate_fidelity(model, {}, p);
    }, py::arg("n_controls") = 1, py::arg("pulse") = "ohqc", py::arg("propagation") = "full",
       py::arg("omega_max_mhz") = 1.0, py::arg("control_amp_mhz") = 40.0, py::arg("theta") = kTwoPi / 4,
       py::arg("phi") = 0.0, py::arg("gamma") = kTwoPi / 2, "Benchmark-state fidelity of the noise-free gate.");

    m.def("ideal_gate", [](std::size_t n_controls, double theta, double phi, double gamma) {
        return Eigen::MatrixXcd(ideal_gate_unitary({n_controls, theta, phi, gamma}).matrix());
    }, py::arg("n_controls") = 1, py::arg("theta") = kTwoPi / 4, py::arg("phi") = 0.0, py::arg("gamma") = kTwoPi / 2,
       "Ideal controlled-U on the qubit space (qubit 0 slowest).");
}
