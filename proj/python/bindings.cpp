#include <sstream>
#include <string>
#include <vector>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "citysim/api.hpp"
#include "citysim/distributed.hpp"
#include "citysim/engine.hpp"
#include "citysim/errors.hpp"
#include "citysim/popgen.hpp"
#include "citysim/serialize.hpp"

namespace py = pybind11;
using namespace citysim;

namespace {

// Rows cross the boundary as JSON text; the Python side decodes them.
std::string rows_json(const std::vector<MetricsRow>& rows) { return nlohmann::json(rows).dump(); }

std::string rows_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    write_metrics_csv(out, rows);
    return out.str();
}

ScenarioConfig scenario_from(const std::string& text) {
    return text.empty() ? ScenarioConfig{} : parse_scenario(text);
}

WorldState make_world(const std::string& scenario, std::size_t population, std::uint64_t seed) {
    return init_world(scenario_from(scenario), population, seed);
}

std::string sample_csv(const std::string& net_json, std::size_t n, std::uint64_t seed) {
    const BayesNet net = net_json.empty() ? default_inputs().net : load_bayes_net(net_json);
    std::string csv;
    for (std::size_t k = 0; k < net.size(); ++k) csv += (k ? "," : "") + net.node(k).id;
    csv += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng(StreamAddress{seed, 0, 0, StreamKind::Person, static_cast<std::uint32_t>(i), 0});
        const Assignment a = prior_sample(net, rng);
        for (std::size_t k = 0; k < net.size(); ++k) csv += (k ? "," : "") + net.node(k).domain[a[k]];
        csv += '\n';
    }
    return csv;
}

std::vector<nlohmann::json> parse_log(const std::string& text) {
    std::istringstream in(text);
    return read_command_log(in);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Agent-based city simulation core";

    static py::exception<citysim::Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const citysim::Error& e) {
            py::object instance = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
            instance.attr("code") = e.code();
            PyErr_SetObject(error.ptr(), instance.ptr());
        }
    });

    m.attr("METRICS_HEADER") = kMetricsHeader;

    m.def("scenarios", [] {
        std::vector<std::string> docs;
        for (const auto& sc : all_scenarios()) docs.push_back(scenario_to_json(sc));
        return docs;
    }, "The 27 scenario documents as JSON text, food-major.");
    m.def("default_net", [] { return default_inputs().net.to_json(); });
    m.def("sample_csv", &sample_csv, py::arg("net_json"), py::arg("n"), py::arg("seed"),
          "Prior samples as CSV text; an empty net uses the built-in one.");

    py::class_<WorldState>(m, "World")
        .def(py::init(&make_world), py::arg("scenario") = "", py::arg("population") = 1000, py::arg("seed") = 0)
        .def("step", [](WorldState& w) { return nlohmann::json(step(w)).dump(); })
        .def("run", [](WorldState& w, std::uint32_t steps) { return rows_json(run(w, steps)); }, py::arg("steps"),
             py::call_guard<py::gil_scoped_release>())
        .def("run_distributed",
             [](WorldState& w, std::uint32_t steps, std::size_t workers) {
                 return rows_json(run_distributed(w, steps, workers));
             },
             py::arg("steps"), py::arg("workers"), py::call_guard<py::gil_scoped_release>())
        .def("metrics_csv", [](const WorldState& w) { return rows_csv(w.metrics); })
        .def("digest", &world_digest)
        .def("total_cash_cents", [](const WorldState& w) { return total_cash(w).cents(); })
        .def("check_invariants", &check_invariants)
        .def("to_json", [](const WorldState& w) { return world_to_json(w).dump(); })
        .def_static("from_json", [](const std::string& text) { return world_from_json(nlohmann::json::parse(text)); })
        .def_property_readonly("step_index", [](const WorldState& w) { return w.step; })
        .def_property_readonly("population", [](const WorldState& w) { return w.persons.size(); });

    py::class_<Simulation>(m, "Simulation")
        .def(py::init([](const std::string& scenario, std::size_t population, std::uint64_t seed) {
                 return std::make_unique<Simulation>(make_world(scenario, population, seed));
             }),
             py::arg("scenario") = "", py::arg("population") = 1000, py::arg("seed") = 0)
        .def("handle", [](Simulation& s, const std::string& command) {
            return s.handle(nlohmann::json::parse(command)).dump();
        })
        .def("advance", [](Simulation& s) { return nlohmann::json(s.advance()).dump(); },
             py::call_guard<py::gil_scoped_release>())
        .def("state", [](const Simulation& s) { return s.state().dump(); })
        .def("command_log", [](const Simulation& s) {
            std::ostringstream out;
            write_command_log(out, s.command_log());
            return out.str();
        })
        .def("metrics", [](const Simulation& s) { return rows_json(s.metrics()); })
        .def("metrics_csv", [](const Simulation& s) { return rows_csv(s.metrics()); })
        .def_property_readonly("step_index", &Simulation::step);

    m.def("replay",
          [](const std::string& scenario, std::size_t population, std::uint64_t seed, const std::string& log,
             std::uint32_t steps) { return rows_json(replay(make_world(scenario, population, seed), parse_log(log), steps)); },
          py::arg("scenario"), py::arg("population"), py::arg("seed"), py::arg("log"), py::arg("steps"),
          "Metrics of a fresh world driven by an NDJSON command log.");
}
