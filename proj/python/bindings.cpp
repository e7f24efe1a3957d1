#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mraloha/analytic.hpp"
#include "mraloha/errors.hpp"
#include "mraloha/experiments.hpp"
#include "mraloha/math_kernels.hpp"
#include "mraloha/optimizer.hpp"
#include "mraloha/simulator.hpp"

namespace py = pybind11;
using namespace mraloha;

PYBIND11_MODULE(_mraloha, m)
{
    m.doc() = "Two-tier slotted-ALOHA multiple-relay throughput: analysis, optimization, simulation";
    m.attr("__version__") = std::string(kVersion);

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError", base.ptr());
    py::register_exception<OrderExceedsCacheError>(m, "OrderExceedsCacheError", base.ptr());
    py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
    py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
    py::register_exception<InvalidConfigError>(m, "InvalidConfigError", PyExc_ValueError);

    m.attr("EPS_FLOOR") = kEpsFloor;
    m.attr("K_CLOSED_MAX") = kClosedMaxK;

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init([](double g, int k, double eps_u, double eps_d, double delta) {
                 SystemParams p{g, k, eps_u, eps_d, delta};
                 p.validate();
                 return p;
             }),
             py::arg("g") = 1.0, py::arg("k") = 1, py::arg("eps_u") = 0.0, py::arg("eps_d") = 0.0,
             py::arg("delta") = 1.0)
        .def_readwrite("g", &SystemParams::g)
        .def_readwrite("k", &SystemParams::k)
        .def_readwrite("eps_u", &SystemParams::eps_u)
        .def_readwrite("eps_d", &SystemParams::eps_d)
        .def_readwrite("delta", &SystemParams::delta)
        .def("validate", &SystemParams::validate)
        .def("__repr__", [](const SystemParams& p) {
            std::ostringstream os;
            os << "SystemParams(g=" << p.g << ", k=" << p.k << ", eps_u=" << p.eps_u << ", eps_d=" << p.eps_d
               << ", delta=" << p.delta << ")";
            return os.str();
        });

    py::enum_<ThroughputMethod>(m, "ThroughputMethod")
        .value("series", ThroughputMethod::series)
        .value("closed_form", ThroughputMethod::closed_form)
        .value("simulated", ThroughputMethod::simulated);

    py::class_<ThroughputResult>(m, "ThroughputResult")
        .def_readonly("value", &ThroughputResult::value)
        .def_readonly("method", &ThroughputResult::method)
        .def_readonly("terms_used", &ThroughputResult::terms_used)
        .def_readonly("est_abs_error", &ThroughputResult::est_abs_error)
        .def("__float__", [](const ThroughputResult& r) { return r.value; });

    py::class_<HCache>(m, "HCache")
        .def(py::init<int>(), py::arg("max_order") = 21)
        .def_property_readonly("max_order", &HCache::max_order)
        .def("__len__", &HCache::size);

    m.def("ancillary_h", &ancillary_h, py::arg("m"), py::arg("x"), py::arg("cache"));
    m.def("ancillary_h_oracle",
          [](int order, double x, double tol) { return ancillary_h_oracle(order, x, SeriesTruncation{tol, 0}); },
          py::arg("m"), py::arg("x"), py::arg("tol") = 1e-14);
    m.def("poisson_pmf", &poisson_pmf, py::arg("n"), py::arg("g"));

    m.def("p_decode_uplink", &p_decode_uplink, py::arg("n"), py::arg("eps_u"));
    m.def("throughput_sa", &throughput_sa, py::arg("g"), py::arg("eps_u"));
    m.def("throughput", &throughput, py::arg("params"));
    m.def("throughput_series",
          [](const SystemParams& p, double tol) { return throughput_series(p, SeriesTruncation{tol, 0}); },
          py::arg("params"), py::arg("tol") = 1e-14);
    m.def("throughput_closed", &throughput_closed, py::arg("params"), py::arg("cache"));
    m.def("bound", &bound, py::arg("g"), py::arg("k"), py::arg("eps_u"));
    m.def("bound_closed", &bound_closed, py::arg("g"), py::arg("k"), py::arg("eps_u"), py::arg("cache"));
    m.def("bound_series",
          [](double g, int k, double eps_u, double tol) { return bound_series(g, k, eps_u, SeriesTruncation{tol, 0}); },
          py::arg("g"), py::arg("k"), py::arg("eps_u"), py::arg("tol") = 1e-14);
    m.def("peak_load", &peak_load, py::arg("eps_u"));
    m.def("throughput_k2_at_peak_load", &throughput_k2_at_peak_load, py::arg("eps_u"), py::arg("eps_d"),
          py::arg("delta"));
    m.def("delta_star_k2", &delta_star_k2, py::arg("eps_u"), py::arg("eps_d"));
    m.def("s_star_k2", &s_star_k2, py::arg("eps_u"), py::arg("eps_d"));

    py::enum_<OptimizationMethod>(m, "OptimizationMethod")
        .value("closed_form_k2", OptimizationMethod::closed_form_k2)
        .value("grid_golden", OptimizationMethod::grid_golden)
        .value("exhaustive_k", OptimizationMethod::exhaustive_k);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("arg_star", &OptimizationResult::arg_star)
        .def_readonly("value_star", &OptimizationResult::value_star)
        .def_readonly("method", &OptimizationResult::method)
        .def_readonly("evaluations", &OptimizationResult::evaluations)
        .def_readonly("arg_tol", &OptimizationResult::arg_tol)
        .def_readonly("per_k_value", &OptimizationResult::per_k_value)
        .def_readonly("per_k_delta", &OptimizationResult::per_k_delta);

    py::class_<LoadRule>(m, "LoadRule")
        .def_static("fixed", &LoadRule::fixed, py::arg("g"))
        .def_static("peak", &LoadRule::peak)
        .def("resolve", &LoadRule::resolve, py::arg("eps_u"));

    m.def("optimize_delta", &optimize_delta, py::arg("g"), py::arg("k"), py::arg("eps_u"), py::arg("eps_d"),
          py::arg("arg_tol") = kDefaultArgTol);
    m.def("optimize_load", &optimize_load, py::arg("k"), py::arg("eps_u"), py::arg("eps_d"), py::arg("delta"),
          py::arg("g_max") = kDefaultGMax, py::arg("arg_tol") = kDefaultArgTol);
    m.def("optimize_k", &optimize_k, py::arg("rule"), py::arg("eps_u"), py::arg("eps_d"),
          py::arg("k_max") = kDefaultKMax, py::arg("arg_tol") = kDefaultArgTol, py::call_guard<py::gil_scoped_release>());

    py::enum_<SimMode>(m, "SimMode")
        .value("full_system", SimMode::full_system)
        .value("bound_uplink_only", SimMode::bound_uplink_only);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](const SystemParams& p, std::int64_t n_slots, std::int64_t warmup, std::uint64_t seed,
                         std::uint64_t stream_id, SimMode mode) {
                 return SimConfig{p, n_slots, warmup, seed, stream_id, mode};
             }),
             py::arg("params"), py::arg("n_slots") = 1'000'000, py::arg("warmup_slots") = 1'000,
             py::arg("seed") = 1, py::arg("stream_id") = 0, py::arg("mode") = SimMode::full_system)
        .def_readwrite("params", &SimConfig::params)
        .def_readwrite("n_slots", &SimConfig::n_slots)
        .def_readwrite("warmup_slots", &SimConfig::warmup_slots)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("stream_id", &SimConfig::stream_id)
        .def_readwrite("mode", &SimConfig::mode);

    py::class_<SimStats>(m, "SimStats")
        .def_readonly("delivered_packets", &SimStats::delivered_packets)
        .def_readonly("measured_slots", &SimStats::measured_slots)
        .def_readonly("throughput_estimate", &SimStats::throughput_estimate)
        .def_readonly("ci95_halfwidth", &SimStats::ci95_halfwidth)
        .def_readonly("relay_decode_rate", &SimStats::relay_decode_rate)
        .def_readonly("uplink_union_rate", &SimStats::uplink_union_rate)
        .def_readonly("sink_collision_rate", &SimStats::sink_collision_rate)
        .def_readonly("relay_decodes", &SimStats::relay_decodes)
        .def_readonly("forwarded", &SimStats::forwarded)
        .def_readonly("downlink_transmissions", &SimStats::downlink_transmissions)
        .def_readonly("sink_arrivals", &SimStats::sink_arrivals)
        .def_readonly("seed", &SimStats::seed)
        .def_readonly("stream_id", &SimStats::stream_id)
        .def_property_readonly("rng", [](const SimStats& s) { return std::string(s.rng); });

    m.def("simulate", &simulate, py::arg("config"), py::call_guard<py::gil_scoped_release>());

    py::enum_<FigureId>(m, "FigureId")
        .value("fig2", FigureId::fig2)
        .value("fig3", FigureId::fig3)
        .value("fig4", FigureId::fig4)
        .value("fig5", FigureId::fig5);

    m.def("figure_csv", [](FigureId id) {
        std::ostringstream os;
        write_csv(os, figure_table(id));
        return os.str();
    }, py::arg("figure"));
}
