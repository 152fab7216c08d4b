// Python bindings: scenario runs, exhaustive checks, and the premium
// calculators, mirroring the CLI surface.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hedgesim/checker.hpp"
#include "hedgesim/premiums.hpp"
#include "hedgesim/protocols.hpp"
#include "hedgesim/scenario.hpp"

namespace py = pybind11;
using namespace hedgesim;

namespace {

SwapDigraph digraph_from(const std::vector<std::string>& vertices,
                         const std::vector<std::tuple<std::string, std::string>>& arcs,
                         const std::vector<std::string>& leaders) {
    SwapDigraph g;
    g.vertices = vertices;
    for (const auto& [u, v] : arcs)
        g.arcs.push_back({u, v, "ch-" + u + "-" + v, "asset-" + u + "-" + v, 100, -1});
    g.leaders.insert(leaders.begin(), leaders.end());
    return g;
}

py::dict payoff_dict(const RunResult& r) {
    py::dict out;
    for (const auto& [p, pay] : r.payoffs) {
        py::dict d;
        d["principal"] = pay.principal_delta;
        d["premium"] = pay.premium_delta;
        d["escrow_trading"] = pay.escrow_trading_delta;
        d["redemption"] = pay.redemption_delta;
        d["escrowed_unredeemed"] = pay.escrowed_unredeemed;
        out[py::str(p)] = d;
    }
    return out;
}

py::dict run_dict(const RunResult& r) {
    py::dict out;
    out["payoffs"] = payoff_dict(r);
    out["trace_hash"] = r.trace_hash;
    out["quiescent"] = r.quiescent;
    out["schedule"] = r.schedule_desc;
    py::list events;
    for (const auto& e : r.events) events.append(event_record(e));
    out["events"] = events;
    return out;
}

}  // namespace

PYBIND11_MODULE(_hedgesim, m) {
    m.doc() = "hedged cross-chain protocol simulator and exhaustive checker";

    m.def(
        "run_scenario_json",
        [](const std::string& json_text) {
            Scenario sc = parse_scenario(json_text);
            return run_dict(run_scenario(sc));
        },
        py::arg("scenario_json"),
        "Run a scenario (JSON text) with every party compliant.");

    m.def(
        "run_scenario_file",
        [](const std::string& path) {
            Scenario sc = load_scenario(path);
            return run_dict(run_scenario(sc));
        },
        py::arg("path"));

    m.def(
        "check_scenario_json",
        [](const std::string& json_text, int max_deviators, bool include_delays) {
            Scenario sc = parse_scenario(json_text);
            if (max_deviators >= 0) sc.bounds.max_deviators = max_deviators;
            sc.bounds.include_delays = include_delays;
            auto driver = make_driver(sc);
            auto suite = make_fast_crypto(sc.seed);
            auto s = check_all(*driver, sc.bounds, *suite);
            py::dict out;
            out["profiles_run"] = s.profiles_run;
            out["liveness"] = s.liveness_pass;
            out["safety_failures"] = s.safety_failures;
            out["hedged_failures"] = s.hedged_failures;
            out["truncated"] = s.truncated;
            py::list cex;
            for (const auto& v : s.counterexamples)
                cex.append(v.property + ": " + v.detail);
            out["counterexamples"] = cex;
            return out;
        },
        py::arg("scenario_json"), py::arg("max_deviators") = -1,
        py::arg("include_delays") = true);

    m.def(
        "redemption_premium",
        [](const std::vector<std::string>& vertices,
           const std::vector<std::tuple<std::string, std::string>>& arcs,
           const std::vector<std::string>& leaders, const std::vector<std::string>& path,
           const std::string& vertex, Amount p) {
            return redemption_premium(digraph_from(vertices, arcs, leaders), path, vertex, p);
        },
        py::arg("vertices"), py::arg("arcs"), py::arg("leaders"), py::arg("path"),
        py::arg("vertex"), py::arg("premium") = 1);

    m.def(
        "escrow_premium",
        [](const std::vector<std::string>& vertices,
           const std::vector<std::tuple<std::string, std::string>>& arcs,
           const std::vector<std::string>& leaders, const std::string& from,
           const std::string& to, Amount p) {
            return escrow_premium(digraph_from(vertices, arcs, leaders), from, to, p);
        },
        py::arg("vertices"), py::arg("arcs"), py::arg("leaders"), py::arg("from_party"),
        py::arg("to_party"), py::arg("premium") = 1);

    m.def(
        "leader_redemption_total",
        [](const std::vector<std::string>& vertices,
           const std::vector<std::tuple<std::string, std::string>>& arcs,
           const std::vector<std::string>& leaders, const std::string& leader, Amount p) {
            return leader_redemption_total(digraph_from(vertices, arcs, leaders), leader, p);
        },
        py::arg("vertices"), py::arg("arcs"), py::arg("leaders"), py::arg("leader"),
        py::arg("premium") = 1);

    m.def("bootstrap_rounds", &bootstrap_rounds, py::arg("asset_a"), py::arg("asset_b"),
          py::arg("premium_divisor"), py::arg("initial_premium"));

    m.def(
        "bootstrap_amounts",
        [](Amount a, Amount b, Amount divisor, int rounds) {
            py::list out;
            for (const auto& r : bootstrap_amounts(a, b, divisor, rounds)) {
                py::dict d;
                d["round"] = r.round;
                d["leader_num"] = r.leader_amount.num;
                d["leader_den"] = r.leader_amount.den;
                d["follower_num"] = r.follower_amount.num;
                d["follower_den"] = r.follower_amount.den;
                out.append(d);
            }
            return out;
        },
        py::arg("asset_a"), py::arg("asset_b"), py::arg("premium_divisor"),
        py::arg("rounds"));

    m.def(
        "diameter",
        [](const std::vector<std::string>& vertices,
           const std::vector<std::tuple<std::string, std::string>>& arcs) {
            return diameter(digraph_from(vertices, arcs, {}));
        },
        py::arg("vertices"), py::arg("arcs"));

    m.attr("__version__") = "1.0.0";
}
