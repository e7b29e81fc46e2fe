#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <normflow/cli.hpp>
#include <normflow/errors.hpp>
#include <normflow/flow.hpp>
#include <normflow/majorant.hpp>
#include <normflow/scheduler.hpp>

namespace py = pybind11;
using nlohmann::json;
using namespace normflow;

namespace
{

// Python values cross the boundary as JSON text.
json from_py(const py::handle &obj)
{
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return json::parse(text);
}

py::object to_py(const json &j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

frequency parse_frequency(const py::handle &obj)
{
    return frequency_from_json(from_py(obj));
}

formal_series parse_series(const py::handle &obj, const frequency &omega, int K)
{
    return series_from_json(from_py(obj), omega.n(), K);
}

json decay_to_json(const decay_row &r)
{
    return {{"k", r.k.k_vector()}, {"kbar", r.k.kbar_vector()}, {"divisor", r.divisor.value},
            {"resonant", r.resonant}, {"leading_rate", r.leading_rate}, {"leading_power", r.leading_power}};
}

} // namespace

PYBIND11_MODULE(_normflow, m)
{
    m.doc() = "Continuous-averaging normal forms: exact flow, majorants, scheduler";

    // Most specific last: translators are tried in reverse order.
    py::register_exception<error>(m, "NormflowError", PyExc_RuntimeError);
    py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
    py::register_exception<bound_violation>(m, "BoundViolation", PyExc_ArithmeticError);

    py::class_<flow_solution>(m, "FlowSolution")
        .def_property_readonly("truncation", &flow_solution::truncation)
        .def_property_readonly("size", [](const flow_solution &s) { return s.coefficients().size(); })
        .def("h_series", [](const flow_solution &s, double delta) { return to_py(to_json(s.h_series(delta))); },
             py::arg("delta"))
        .def("calH_series",
             [](const flow_solution &s, double delta) { return to_py(to_json(s.calH_series(delta))); },
             py::arg("delta"))
        .def("reality_defect",
             [](const flow_solution &s, std::vector<double> deltas) { return reality_defect(s, deltas); },
             py::arg("deltas"))
        .def(
            "normal_form",
            [](const flow_solution &s, double threshold) {
                const auto nf = normal_form_limit(s, threshold);
                json rows = json::array();
                for (const auto &r : nf.residuals) {
                    rows.push_back(decay_to_json(r));
                }
                json out{{"order", nf.order ? json(*nf.order) : json(nullptr)},
                         {"threshold", nf.threshold},
                         {"n_diamond", to_json(nf.n_diamond)},
                         {"residuals", rows}};
                return to_py(out);
            },
            py::arg("threshold") = 1e-10);

    m.def(
        "flow_exact",
        [](const py::object &hamiltonian, const py::object &freq, int K, std::size_t threads) {
            const auto omega = parse_frequency(freq);
            const auto h = parse_series(hamiltonian, omega, K);
            py::gil_scoped_release release;
            return flow_exact(h, omega, K, {exp_poly::default_term_cap, threads});
        },
        py::arg("hamiltonian"), py::arg("frequency"), py::arg("truncation"), py::arg("threads") = 0);

    m.def(
        "birkhoff",
        [](const py::object &hamiltonian, const py::object &freq, int K) {
            const auto omega = parse_frequency(freq);
            return to_py(to_json(birkhoff_oracle(parse_series(hamiltonian, omega, K), omega, K)));
        },
        py::arg("hamiltonian"), py::arg("frequency"), py::arg("truncation"));

    m.def("burgers_radius", &burgers_radius, py::arg("a"), py::arg("b"), py::arg("tau"));
    m.def("burgers_series", &burgers_series, py::arg("a"), py::arg("b"), py::arg("tau"), py::arg("K"));
    m.def("derivative_majorant_violation", &derivative_majorant_violation, py::arg("rho"), py::arg("K"));
    m.def(
        "analyticity_bounds",
        [](double h, double rho, int n, double delta) {
            const auto r = analyticity_bounds(h, rho, n, delta);
            return to_py({{"radius", r.radius}, {"bound", r.bound}, {"a", r.a}, {"b", r.b}, {"tau", r.tau}});
        },
        py::arg("h"), py::arg("rho"), py::arg("n"), py::arg("delta"));

    m.def(
        "a_sequence",
        [](const py::object &freq, std::size_t n, int J) { return make_a_sequence(parse_frequency(freq), n, J); },
        py::arg("frequency"), py::arg("n"), py::arg("J"));
    m.def(
        "b_sequence",
        [](std::vector<double> a, int J) {
            const auto seq = b_from_a(a, J);
            std::vector<double> b;
            for (int s = seq.s_min(); s <= seq.s_max(); ++s) {
                b.push_back(seq.b(s));
            }
            return b;
        },
        py::arg("a"), py::arg("J"));
    m.def(
        "bruno_check",
        [](std::vector<double> a, int J) {
            const auto r = bruno_check(a, J);
            return to_py({{"partial_sum", r.partial_sum}, {"terms", r.terms}, {"evidence_yes", r.evidence_yes}});
        },
        py::arg("a"), py::arg("J"));

    m.def("presets", &cli::preset_names);
    m.def(
        "preset", [](const std::string &name) { return to_py(cli::preset(name)); }, py::arg("name"));
    m.def(
        "execute",
        [](const py::object &config) {
            const auto cfg = cli::parse_config(from_py(config));
            cli::run_result res;
            {
                py::gil_scoped_release release;
                res = cli::execute(cfg);
            }
            return py::make_tuple(res.exit_code, to_py(res.report));
        },
        py::arg("config"));
    m.def(
        "run",
        [](const std::string &path, std::optional<std::string> out, std::optional<int> k,
           std::optional<std::string> mode) {
            std::ostringstream o, e;
            const int code = cli::run(path, {std::move(out), k, std::move(mode)}, o, e);
            return py::make_tuple(code, o.str(), e.str());
        },
        py::arg("config_path"), py::arg("out") = py::none(), py::arg("k") = py::none(), py::arg("mode") = py::none());
}
