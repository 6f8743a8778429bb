#include "avgq/errors.hpp"
#include "avgq/generators.hpp"
#include "avgq/harness.hpp"
#include "avgq/oracle.hpp"
#include "avgq/qlearn.hpp"
#include "avgq/schedules.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace avgq;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Amdp amdp_from_arrays(const Array& P, const Array& r) {
    if (P.ndim() != 3 || r.ndim() != 2) {
        throw ValidationError("expected P with shape (S, A, S) and r with shape (S, A)");
    }
    const auto S = static_cast<int>(P.shape(0));
    const auto A = static_cast<int>(P.shape(1));
    if (P.shape(2) != S || r.shape(0) != S || r.shape(1) != A) {
        throw ValidationError("P and r shapes disagree");
    }
    Amdp mdp(S, A, std::vector<double>(P.data(), P.data() + P.size()),
             std::vector<double>(r.data(), r.data() + r.size()));
    validate(mdp);
    return mdp;
}

Array q_array(const QTable& q) {
    Array out({q.states(), q.actions()});
    std::copy(q.values().begin(), q.values().end(), out.mutable_data());
    return out;
}

Array v_array(const VTable& v) {
    Array out(v.size());
    std::copy(v.values().begin(), v.values().end(), out.mutable_data());
    return out;
}

py::list rows_of(const RunRecord& record) {
    py::list rows;
    for (const auto& row : record.rows) {
        py::dict d;
        d["k"] = row.k;
        d["iterations_cum"] = row.iterations;
        d["samples_cum"] = row.samples;
        d["comm_rounds_cum"] = row.comm_rounds;
        d["err_inf"] = row.err_inf;
        d["gamma_k"] = row.gamma;
        d["eta_last"] = row.eta_last;
        d["m_agents"] = row.m_agents;
        rows.append(d);
    }
    return rows;
}

ScheduleConfig schedule_for(const Amdp& mdp, const std::string& kind, double c_N, int M, double delta,
                            std::optional<long> force_nk) {
    ScheduleConfig cfg;
    cfg.kind = parse_schedule_kind(kind);
    cfg.c_N = c_N;
    cfg.M = M;
    cfg.delta = delta;
    cfg.S = mdp.S;
    cfg.A = mdp.A;
    cfg.force_nk = force_nk;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_avgq, m) {
    m.doc() = "Average-reward tabular Q-learning core";

    auto base = py::register_exception<Error>(m, "AvgqError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<InfeasibleEpoch>(m, "InfeasibleEpoch", base.ptr());
    py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());

    py::class_<Amdp>(m, "Amdp")
        .def(py::init(&amdp_from_arrays), py::arg("P"), py::arg("r"))
        .def_readonly("S", &Amdp::S)
        .def_readonly("A", &Amdp::A)
        .def_property_readonly("P", [](const Amdp& mdp) {
            Array out({mdp.S, mdp.A, mdp.S});
            std::copy(mdp.P.begin(), mdp.P.end(), out.mutable_data());
            return out;
        })
        .def_property_readonly("r", [](const Amdp& mdp) {
            Array out({mdp.S, mdp.A});
            std::copy(mdp.r.begin(), mdp.r.end(), out.mutable_data());
            return out;
        })
        .def("to_json", &dump_mdp);

    m.def("generate", [](const std::string& spec) { return generate_mdp(parse_generator(spec)); },
          py::arg("spec"), "cycle2 | ring:S,slip | dirichlet:S,A,conc[,seed]");
    m.def("load", [](const std::string& path) { return load_mdp(path); }, py::arg("path"));
    m.def("parse", &parse_mdp, py::arg("text"));

    m.def(
        "solve_average",
        [](const Amdp& mdp, double tol) {
            const GainBias g = solve_average(mdp, tol);
            py::dict d;
            d["gain"] = g.gain;
            d["bias"] = v_array(g.bias);
            d["span"] = g.span;
            d["residual"] = g.residual;
            d["iterations"] = g.iterations;
            return d;
        },
        py::arg("mdp"), py::arg("tol") = kOracleTolerance);

    m.def(
        "solve_discounted",
        [](const Amdp& mdp, double gamma, double tol) {
            const DiscountedSolution s = solve_discounted(mdp, gamma, tol);
            py::dict d;
            d["q"] = q_array(s.q);
            d["v"] = v_array(s.v);
            d["residual"] = s.residual;
            d["iterations"] = s.iterations;
            return d;
        },
        py::arg("mdp"), py::arg("gamma"), py::arg("tol") = kOracleTolerance);

    m.def(
        "evaluate_policy",
        [](const Amdp& mdp, std::vector<int> actions) {
            return v_array(evaluate_policy_average(mdp, DeterministicPolicy{std::move(actions)}));
        },
        py::arg("mdp"), py::arg("actions"));

    m.def(
        "epoch_plan",
        [](const Amdp& mdp, const std::string& kind, int k, double c_N, int M, double delta,
           std::optional<long> force_nk) {
            const EpochPlan p = epoch_plan(schedule_for(mdp, kind, c_N, M, delta, force_nk), k);
            py::dict d;
            d["k"] = p.k;
            d["N"] = p.N;
            d["gamma"] = p.gamma;
            d["comm_set"] = p.comm_set;
            d["g"] = p.g;
            return d;
        },
        py::arg("mdp"), py::arg("kind"), py::arg("k"), py::arg("c_N") = 1.0, py::arg("M") = 1,
        py::arg("delta") = 0.1, py::arg("force_nk") = py::none());

    m.def(
        "run_single",
        [](const Amdp& mdp, const std::string& kind, int K, std::uint64_t seed, double c_N, double delta,
           std::optional<long> force_nk) {
            RunOptions opt;
            opt.oracle_gain = solve_average(mdp).gain;
            const ScheduleConfig cfg = schedule_for(mdp, kind, c_N, 1, delta, force_nk);
            SingleRunResult out;
            {
                py::gil_scoped_release release;
                out = run_single(mdp, cfg, K, seed, opt);
            }
            return py::make_tuple(q_array(out.q), rows_of(out.record));
        },
        py::arg("mdp"), py::arg("kind") = "sg2", py::arg("K") = 1, py::arg("seed") = 0, py::arg("c_N") = 1.0,
        py::arg("delta") = 0.1, py::arg("force_nk") = py::none());

    m.def(
        "run_fed",
        [](const Amdp& mdp, const std::string& kind, int K, int M, std::uint64_t seed, double c_N, double delta,
           std::optional<long> force_nk, bool shared_stream, int threads) {
            RunOptions opt;
            opt.oracle_gain = solve_average(mdp).gain;
            opt.shared_stream = shared_stream;
            opt.threads = threads;
            const ScheduleConfig cfg = schedule_for(mdp, kind, c_N, M, delta, force_nk);
            FedRunResult out;
            {
                py::gil_scoped_release release;
                out = run_fed(mdp, cfg, K, seed, opt);
            }
            py::dict d;
            d["q"] = q_array(out.q);
            d["policy"] = out.policy.action;
            d["rows"] = rows_of(out.record);
            d["comm_count"] = out.comm_count;
            d["samples_per_agent"] = out.samples_per_agent;
            return d;
        },
        py::arg("mdp"), py::arg("kind") = "fg2", py::arg("K") = 1, py::arg("M") = 1, py::arg("seed") = 0,
        py::arg("c_N") = 1.0, py::arg("delta") = 0.1, py::arg("force_nk") = py::none(),
        py::arg("shared_stream") = false, py::arg("threads") = 1);

    m.def(
        "verify",
        [](double eta_perturbation, int battery_size) {
            std::ostringstream out;
            VerifyOptions options;
            options.eta_perturbation = eta_perturbation;
            options.battery_size = battery_size;
            py::list results;
            for (const auto& r : verify_suite(out, options)) {
                results.append(py::make_tuple(r.name, r.passed, r.detail));
            }
            return results;
        },
        py::arg("eta_perturbation") = 0.0, py::arg("battery_size") = 50);
}
