// Python bindings: rate systems, analysis, traffic solves, simulation and
// the verification harness.  Heavy calls release the GIL.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "exclusion/clt.hpp"
#include "exclusion/config.hpp"
#include "exclusion/jackson.hpp"
#include "exclusion/partition.hpp"
#include "exclusion/report_io.hpp"
#include "exclusion/simulate.hpp"
#include "exclusion/verify.hpp"

namespace py = pybind11;
using namespace exclusion;

namespace {

MergePolicy policy_from(const std::string& name, std::uint64_t seed) {
    if (name == "all") return MergePolicy::all();
    if (name == "leftmost") return MergePolicy::leftmost();
    if (name == "rightmost") return MergePolicy::rightmost();
    if (name == "random") return MergePolicy::random(seed);
    throw ModelError("unknown merge policy '" + name + "'");
}

py::list partition_list(const OrderedPartition& p) {
    py::list out;
    for (const auto& part : p.parts()) out.append(py::make_tuple(part.first, part.last()));
    return out;
}

OrderedPartition partition_from(const std::vector<int>& lengths) { return OrderedPartition::from_lengths(lengths); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stable clouds of finite exclusion processes";
    m.attr("__version__") = EXCLUSION_VERSION;
    m.attr("RNG_NAME") = std::string(kRngName);

    // Translators run newest first, so the derived ConfigError goes last.
    const auto model_error = py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", model_error.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<RateSystem>(m, "RateSystem")
        .def(py::init(&RateSystem::validate), py::arg("a"), py::arg("b"))
        .def_property_readonly("a", &RateSystem::left_rates)
        .def_property_readonly("b", &RateSystem::right_rates)
        .def_property_readonly("particles", &RateSystem::particles)
        .def_property_readonly("gaps", &RateSystem::gaps)
        .def_property_readonly("satisfies_assumption_a", &RateSystem::satisfies_assumption_a)
        .def("reflect", [](const RateSystem& r) { return reflect(r); })
        .def("__eq__", [](const RateSystem& x, const RateSystem& y) { return x == y; })
        .def("__repr__", [](const RateSystem& r) {
            return "RateSystem(a=" + py::repr(py::cast(r.left_rates())).cast<std::string>() +
                   ", b=" + py::repr(py::cast(r.right_rates())).cast<std::string>() + ")";
        });

    // Interval quantities take (first, length) with 1-based labels.
    m.def("alpha", [](const RateSystem& r, int first, int length) { return alpha(r, {first, length}); });
    m.def("beta", [](const RateSystem& r, int first, int length) { return beta(r, {first, length}); });
    m.def("hv", [](const RateSystem& r, int first, int length) { return hv(r, {first, length}); });
    m.def("hrho", [](const RateSystem& r, int first, int length, int gap) { return hrho(r, {first, length}, gap); });
    m.def("hrho_all", [](const RateSystem& r, int first, int length) { return hrho_all(r, {first, length}); });
    m.def("expected_cloud_width", [](std::vector<double> rhos) { return expected_cloud_width(GeometricProductLaw(std::move(rhos))); });

    py::class_<TrafficSolution>(m, "TrafficSolution")
        .def_readonly("nu", &TrafficSolution::nu)
        .def_readonly("rho", &TrafficSolution::rho)
        .def_readonly("stable_set", &TrafficSolution::stable_set)
        .def_readonly("critical_set", &TrafficSolution::critical_set)
        .def_readonly("residual", &TrafficSolution::residual)
        .def_readonly("iterations", &TrafficSolution::iterations);
    m.def("solve_stable_traffic", [](const RateSystem& r) { return solve_stable_traffic(to_jackson(r)); });
    m.def(
        "solve_general_traffic",
        [](const RateSystem& r, double tol, long max_iter) {
            GeneralTrafficOptions o;
            o.tol = tol;
            o.max_iter = max_iter;
            return solve_general_traffic(to_jackson(r), o);
        },
        py::arg("rates"), py::arg("tol") = 1e-12, py::arg("max_iter") = 1'000'000);

    py::class_<CloudReport>(m, "CloudReport")
        .def_property_readonly("partition", [](const CloudReport& c) { return partition_list(c.partition); })
        .def_readonly("rho", &CloudReport::rho)
        .def_readonly("speeds", &CloudReport::speeds)
        .def_readonly("cloud_speeds", &CloudReport::cloud_speeds)
        .def_property_readonly("stationary",
                               [](const CloudReport& c) {
                                   std::vector<std::vector<double>> out;
                                   for (const auto& law : c.stationary) out.push_back(law.rhos());
                                   return out;
                               })
        .def_readonly("expected_widths", &CloudReport::expected_widths)
        .def_property_readonly("all_singletons", [](const CloudReport& c) { return c.flags.all_singletons; })
        .def_property_readonly("single_cloud", [](const CloudReport& c) { return c.flags.single_cloud; })
        .def_property_readonly("all_speeds_positive", [](const CloudReport& c) { return c.flags.all_speeds_positive; })
        .def_property_readonly("critical_tie", [](const CloudReport& c) { return c.flags.critical_tie; })
        .def_readonly("equal_speed_adjacencies", &CloudReport::equal_speed_adjacencies)
        .def_property_readonly("clt",
                               [](const CloudReport& c) -> py::object {
                                   if (!c.clt) return py::none();
                                   return py::make_tuple(c.clt->speed, c.clt->sigma2);
                               })
        .def_readonly("excursion_rate", &CloudReport::excursion_rate)
        .def_property_readonly("merge_steps",
                               [](const CloudReport& c) {
                                   py::list steps;
                                   for (const auto& s : c.trace.steps) {
                                       steps.append(py::make_tuple(partition_list(s.partition), s.part_speeds, s.merged));
                                   }
                                   return steps;
                               })
        .def(
            "to_json", [](const CloudReport& c, std::uint64_t seed) { return report_to_json(c, {seed}); },
            py::arg("seed") = 0)
        .def("__str__", [](const CloudReport& c) { return report_to_text(c); });

    m.def(
        "analyze",
        [](const RateSystem& r, const std::string& policy, std::uint64_t seed) { return analyze(r, policy_from(policy, seed)); },
        py::arg("rates"), py::arg("policy") = "all", py::arg("policy_seed") = 0);
    m.def("full_loads", [](const RateSystem& r, const std::vector<int>& lengths) { return full_loads(r, partition_from(lengths)); },
          py::arg("rates"), py::arg("part_lengths"));
    m.def("check_partition",
          [](const RateSystem& r, const std::vector<int>& lengths) { return check_partition(r, partition_from(lengths)); },
          py::arg("rates"), py::arg("part_lengths"));
    m.def("partition_oracle", [](const RateSystem& r, double tol) { return partition_list(partition_oracle(r, tol)); },
          py::arg("rates"), py::arg("tol") = 1e-9);
    m.def("clt_constants_two_particle", [](const RateSystem& r) {
        const auto c = clt_constants_two_particle(r);
        return py::make_tuple(c.speed, c.sigma2);
    });

    m.def(
        "simulate",
        [](const RateSystem& r, double horizon, std::uint64_t seed, std::uint64_t replica, std::optional<double> burn_in,
           std::vector<long long> initial_gaps, std::vector<double> sample_times, bool record_excursions) {
            SimConfig cfg;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.replica = replica;
            cfg.burn_in = burn_in;
            cfg.initial_gaps = std::move(initial_gaps);
            cfg.sample_times = std::move(sample_times);
            cfg.record_excursions = record_excursions;
            SimStats s;
            {
                py::gil_scoped_release release;
                s = simulate(r, cfg);
            }
            py::dict out;
            out["final_positions"] = s.final_positions;
            out["displacement"] = s.displacement;
            out["event_count"] = s.event_count;
            out["burn_in"] = s.burn_in;
            std::vector<std::vector<double>> marginals;
            for (const auto& row : s.occupation.marginal) {
                std::vector<double> p(row);
                for (auto& x : p) x /= s.occupation.window;
                marginals.push_back(std::move(p));
            }
            out["gap_marginals"] = marginals;
            py::array_t<double> ex({static_cast<py::ssize_t>(s.excursions.size()), py::ssize_t{2}});
            auto e = ex.mutable_unchecked<2>();
            for (std::size_t k = 0; k < s.excursions.size(); ++k) {
                e(k, 0) = static_cast<double>(s.excursions[k].displacement);
                e(k, 1) = s.excursions[k].duration;
            }
            out["excursions"] = ex;
            py::list snaps;
            for (const auto& sn : s.snapshots) snaps.append(py::make_tuple(sn.time, sn.positions));
            out["snapshots"] = snaps;
            return out;
        },
        py::arg("rates"), py::arg("horizon"), py::arg("seed") = 0, py::arg("replica") = 0, py::arg("burn_in") = py::none(),
        py::arg("initial_gaps") = std::vector<long long>{}, py::arg("sample_times") = std::vector<double>{},
        py::arg("record_excursions") = false);

    m.def(
        "replica_displacements",
        [](const RateSystem& r, double horizon, std::size_t replicas, std::uint64_t seed, unsigned threads) {
            SimConfig cfg;
            cfg.horizon = horizon;
            cfg.seed = seed;
            std::vector<SimStats> runs;
            {
                py::gil_scoped_release release;
                runs = simulate_replicas(r, cfg, replicas, threads);
            }
            const auto n = static_cast<py::ssize_t>(r.particles());
            py::array_t<long long> out({static_cast<py::ssize_t>(replicas), n});
            auto o = out.mutable_unchecked<2>();
            for (std::size_t k = 0; k < runs.size(); ++k) {
                for (py::ssize_t i = 0; i < n; ++i) o(k, i) = runs[k].displacement[static_cast<std::size_t>(i)];
            }
            return out;
        },
        "Displacements X_i(T) - X_i(0), one row per replica.", py::arg("rates"), py::arg("horizon"), py::arg("replicas"),
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "truncated_stationary",
        [](const RateSystem& r, int cap) {
            TruncatedLaw law;
            {
                py::gil_scoped_release release;
                law = truncated_stationary({r, cap});
            }
            // Gap 1 varies fastest, so the flat vector is Fortran-ordered.
            std::vector<py::ssize_t> shape(law.gaps, cap + 1);
            std::vector<py::ssize_t> strides(law.gaps);
            py::ssize_t stride = sizeof(double);
            for (std::size_t k = 0; k < law.gaps; ++k) {
                strides[k] = stride;
                stride *= cap + 1;
            }
            return py::array_t<double>(shape, strides, law.pi.data());
        },
        "Stationary law of the gap chain on {0..cap}^N as an N-dimensional array.", py::arg("rates"), py::arg("cap") = 40);

    m.def(
        "verify",
        [](const RateSystem& r, double horizon, std::size_t replicas, std::uint64_t seed, unsigned threads) {
            SimBudget b;
            b.horizon = horizon;
            b.replicas = replicas;
            b.seed = seed;
            b.threads = threads;
            VerificationReport rep;
            {
                py::gil_scoped_release release;
                rep = verify_instance(r, b);
            }
            return verification_to_json(rep, {seed});
        },
        "Runs the verification harness; returns the JSON report.", py::arg("rates"), py::arg("horizon") = 1e4,
        py::arg("replicas") = 8, py::arg("seed") = 1, py::arg("threads") = 1);

    m.def("golden_instances", [] {
        py::list out;
        for (auto& g : golden_instances()) out.append(py::make_tuple(g.name, g.rates));
        return out;
    });

    m.def("parse_config", [](const std::string& text) {
        const auto c = parse_config(text);
        py::dict out;
        out["a"] = c.a;
        out["b"] = c.b;
        out["horizon"] = c.horizon;
        out["seed"] = c.seed;
        out["replicas"] = c.replicas;
        out["burn_in"] = c.burn_in;
        out["initial_gaps"] = c.initial_gaps;
        out["cap"] = c.cap;
        return out;
    });
    m.def("config_rates", [](const std::string& text) { return parse_config(text).rates(); });
}
