// hedgesim command line: run one scenario, exhaustively check a scenario's
// strategy space, or print its premium schedule.
//
//   hedgesim run scenarios/two_party_hedged.json --deviate alice:omit:reveal
//   hedgesim check scenarios/broker.json --max-deviators 2
//   hedgesim premiums scenarios/cycle3.json
//
// Exit codes: 0 all requested checks pass, 1 property failure,
// 2 usage/parse error (including an exceeded enumeration cap).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "hedgesim/checker.hpp"
#include "hedgesim/premiums.hpp"
#include "hedgesim/protocols.hpp"
#include "hedgesim/scenario.hpp"

using namespace hedgesim;

namespace {

struct CommonOpts {
    std::string scenario_path;
    int delta_ticks = 0;
    std::string format = "table";
    std::uint64_t seed = 0;
};

StrategyProfile parse_deviations(const ProtocolDriver& driver,
                                 const std::vector<std::string>& specs) {
    StrategyProfile prof;
    auto obls = driver.obligations();
    for (const auto& s : specs) {
        // party:kind:class[:ticks]
        std::vector<std::string> parts;
        size_t pos = 0;
        while (pos <= s.size()) {
            size_t c = s.find(':', pos);
            if (c == std::string::npos) {
                parts.push_back(s.substr(pos));
                break;
            }
            parts.push_back(s.substr(pos, c - pos));
            pos = c + 1;
        }
        if (parts.size() < 3) throw std::invalid_argument("bad --deviate spec: " + s);
        const std::string& party = parts[0];
        const std::string& kind = parts[1];
        const std::string& cls = parts[2];
        const Obligation* target = nullptr;
        for (const auto& o : obls)
            if (o.party == party && o.cls == cls) target = &o;
        if (!target)
            throw std::invalid_argument("no obligation '" + cls + "' for " + party);
        Directive d;
        d.obligation_id = target->id;
        if (kind == "omit") {
            d.kind = DirectiveKind::omit;
        } else if (kind == "delay") {
            d.kind = DirectiveKind::delay;
            d.delay = parts.size() > 3 ? std::stoi(parts[3]) : 1;
        } else if (kind == "wrong-key") {
            d.kind = DirectiveKind::wrong_key;
        } else if (kind == "one-sided") {
            d.kind = DirectiveKind::one_sided;
            d.chain = parts.size() > 3 ? parts[3] : "coin";
        } else {
            throw std::invalid_argument("unknown deviation kind: " + kind);
        }
        prof.directives[party].push_back(d);
    }
    return prof;
}

void print_payoffs(const RunResult& r, const std::string& format, std::ostream& os) {
    if (format == "records") {
        for (const auto& [p, pay] : r.payoffs) {
            os << "{\"record\":\"payoff\",\"party\":\"" << p << "\",\"principal\":"
               << pay.principal_delta << ",\"premium\":" << pay.premium_delta
               << ",\"escrowed_unredeemed\":" << pay.escrowed_unredeemed << "}\n";
        }
        os << "{\"record\":\"trace-hash\",\"value\":\"" << std::hex << r.trace_hash
           << std::dec << "\"}\n";
        return;
    }
    os << "schedule: " << r.schedule_desc << "\n";
    os << "party            principal    premium   locked-unredeemed\n";
    for (const auto& [p, pay] : r.payoffs) {
        os.width(16);
        os << std::left << p << std::right;
        os.width(10);
        os << pay.principal_delta;
        os.width(11);
        os << pay.premium_delta;
        os.width(16);
        os << pay.escrowed_unredeemed << "\n";
    }
    os << "trace hash: " << std::hex << r.trace_hash << std::dec << "\n";
}

int cmd_run(const CommonOpts& common, const std::vector<std::string>& deviations,
            const std::string& trace_out) {
    Scenario sc = load_scenario(common.scenario_path);
    if (common.delta_ticks > 0) sc.ticks_per_delta = common.delta_ticks;
    if (common.seed) sc.seed = common.seed;
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    StrategyProfile prof = parse_deviations(*driver, deviations);
    FaultFlags opts;
    opts.order_permutation_seed = common.seed;
    RunResult r = driver->run(prof, *suite, opts);

    if (!trace_out.empty()) {
        std::ofstream tf(trace_out);
        if (!tf) throw std::invalid_argument("cannot write trace file: " + trace_out);
        for (const auto& e : r.events) tf << event_record(e) << "\n";
    }
    print_payoffs(r, common.format, std::cout);

    auto sv = check_safety(*driver, r, prof);
    auto hv = check_hedged(*driver, r, prof);
    bool zs = zero_sum(r);
    std::cout << "safety: " << (sv.pass ? "pass" : "FAIL " + sv.detail) << "\n";
    std::cout << "hedged: " << (hv.pass ? "pass" : "FAIL " + hv.detail) << "\n";
    if (!zs) std::cout << "conservation: FAIL\n";
    return (sv.pass && hv.pass && zs) ? 0 : 1;
}

int cmd_check(const CommonOpts& common, int max_deviators, int max_delay,
              bool no_delays, std::size_t cap) {
    Scenario sc = load_scenario(common.scenario_path);
    if (common.delta_ticks > 0) sc.ticks_per_delta = common.delta_ticks;
    if (max_deviators >= 0) sc.bounds.max_deviators = max_deviators;
    if (max_delay >= 0) sc.bounds.max_delay = max_delay;
    if (no_delays) sc.bounds.include_delays = false;
    if (cap > 0) sc.bounds.cap = cap;
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    FaultFlags opts;
    opts.order_permutation_seed = common.seed;
    auto summary = check_all(*driver, sc.bounds, *suite, opts);

    std::cout << "scenario: " << sc.name << " (" << to_string(sc.kind) << ")\n";
    std::cout << "profiles checked: " << summary.profiles_run << "\n";
    std::cout << "liveness: " << (summary.liveness_pass ? "pass" : "FAIL " + summary.liveness_detail)
              << "\n";
    std::cout << "safety failures: " << summary.safety_failures << "\n";
    std::cout << "hedged failures: " << summary.hedged_failures << "\n";
    for (const auto& v : summary.counterexamples) {
        std::cout << "counterexample [" << v.property << "] "
                  << v.profile.describe(driver->obligations()) << ": " << v.detail
                  << " (trace " << std::hex << v.trace_hash << std::dec << ")\n";
    }
    if (summary.truncated) {
        std::cout << "enumeration truncated at cap " << sc.bounds.cap
                  << "; raise check.cap to cover the full space\n";
        return 2;
    }
    bool pass = summary.liveness_pass && summary.safety_failures == 0 &&
                summary.hedged_failures == 0;
    return pass ? 0 : 1;
}

int cmd_premiums(const CommonOpts& common) {
    Scenario sc = load_scenario(common.scenario_path);
    bool records = common.format == "records";
    switch (sc.kind) {
        case ProtocolKind::multi_party: {
            auto sched = make_premium_schedule(sc.digraph, sc.premium);
            if (!records) std::cout << "redemption premiums (per hashkey, per arc):\n";
            for (const auto& d : sched.redemption) {
                if (records) {
                    std::cout << "{\"record\":\"redemption\",\"leader\":\"" << d.leader
                              << "\",\"arc\":\"" << d.on_from << "->" << d.on_to
                              << "\",\"amount\":" << d.amount << "}\n";
                } else {
                    std::cout << "  k[" << d.leader << "] on " << d.on_from << "->" << d.on_to
                              << ": " << d.amount << "  (path";
                    for (const auto& v : d.path) std::cout << " " << v;
                    std::cout << ")\n";
                }
            }
            if (!records) std::cout << "escrow premiums:\n";
            for (const auto& [arc, amt] : sched.escrow) {
                if (records)
                    std::cout << "{\"record\":\"escrow\",\"arc\":\"" << arc.first << "->"
                              << arc.second << "\",\"amount\":" << amt << "}\n";
                else
                    std::cout << "  E(" << arc.first << "->" << arc.second << ") = " << amt
                              << "\n";
            }
            for (const auto& [l, amt] : sched.leader_totals)
                if (!records) std::cout << "  R(" << l << ") = " << amt << "\n";
            break;
        }
        case ProtocolKind::broker: {
            auto bp = broker_premiums(sc.digraph, sc.broker, sc.premium, 1);
            for (const auto& [arc, amt] : bp.trading[0])
                std::cout << (records ? "{\"record\":\"trading\",\"arc\":\"" + arc.first +
                                            "->" + arc.second + "\",\"amount\":" +
                                            std::to_string(amt) + "}"
                                      : "  T(" + arc.first + "->" + arc.second + ") = " +
                                            std::to_string(amt))
                          << "\n";
            for (const auto& [arc, amt] : bp.escrow)
                std::cout << (records ? "{\"record\":\"escrow\",\"arc\":\"" + arc.first + "->" +
                                            arc.second + "\",\"amount\":" + std::to_string(amt) +
                                            "}"
                                      : "  E(" + arc.first + "->" + arc.second + ") = " +
                                            std::to_string(amt))
                          << "\n";
            for (const auto& d : bp.redemption)
                if (!records)
                    std::cout << "  k[" << d.leader << "] on " << d.on_from << "->" << d.on_to
                              << ": " << d.amount << "\n";
            break;
        }
        case ProtocolKind::bootstrap: {
            int r = sc.boot_rounds;
            if (r <= 0) r = bootstrap_rounds(sc.value_a, sc.value_b, sc.boot_divisor, sc.boot_p0);
            std::cout << (records ? "{\"record\":\"rounds\",\"value\":" + std::to_string(r) + "}"
                                  : "bootstrapping rounds: " + std::to_string(r))
                      << "\n";
            for (const auto& br : bootstrap_amounts(sc.value_a, sc.value_b, sc.boot_divisor,
                                                    std::max(r, 1))) {
                std::cout << (records ? "{\"record\":\"round\",\"round\":" : "  round ")
                          << br.round
                          << (records ? ",\"leader\":\"" : ": leader deposits ")
                          << br.leader_amount
                          << (records ? "\",\"follower\":\"" : ", follower deposits ")
                          << br.follower_amount << (records ? "\"}" : "") << "\n";
            }
            break;
        }
        default: {
            std::cout << "two-party premiums: alice " << (sc.alice_premium + sc.bob_premium)
                      << " on the banana chain, bob " << sc.bob_premium
                      << " on the apricot chain\n";
            break;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hedged cross-chain protocol simulator and exhaustive checker"};
    app.require_subcommand(1);

    CommonOpts common;
    std::vector<std::string> deviations;
    std::string trace_out;
    int max_deviators = -1, max_delay = -1;
    bool no_delays = false;
    std::size_t cap = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("scenario,--scenario", common.scenario_path, "scenario file (JSON)")
            ->required();
        cmd->add_option("--delta-ticks", common.delta_ticks, "ticks per Delta period");
        cmd->add_option("--format", common.format, "table or records")
            ->check(CLI::IsMember({"table", "records"}));
        cmd->add_option("--seed", common.seed,
                        "ordering-permutation seed (0 = canonical order)");
    };

    auto* run = app.add_subcommand("run", "execute one scenario run");
    add_common(run);
    run->add_option("--deviate", deviations,
                    "deviation spec party:kind:class[:arg], repeatable");
    run->add_option("--trace-out", trace_out, "write the event trace to a file");

    auto* check = app.add_subcommand("check", "enumerate strategy profiles and check properties");
    add_common(check);
    check->add_option("--max-deviators", max_deviators, "simultaneous deviators bound");
    check->add_option("--max-delay", max_delay, "delay bound in Delta units");
    check->add_flag("--no-delays", no_delays, "omissions only");
    check->add_option("--cap", cap, "profile enumeration cap");

    auto* premiums = app.add_subcommand("premiums", "print the premium schedule without running");
    add_common(premiums);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(common, deviations, trace_out);
        if (check->parsed()) return cmd_check(common, max_deviators, max_delay, no_delays, cap);
        if (premiums->parsed()) return cmd_premiums(common);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
