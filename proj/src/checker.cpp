#include "hedgesim/checker.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace hedgesim {

namespace {

struct TransferSpec {
    PartyId from;
    PartyId to;
};

// Static list of intended transfers, at lot granularity.
std::vector<TransferSpec> expected_transfers(const ProtocolDriver& driver) {
    const Scenario& sc = driver.scenario();
    std::vector<TransferSpec> out;
    switch (sc.kind) {
        case ProtocolKind::two_party_base:
        case ProtocolKind::two_party_hedged:
        case ProtocolKind::bootstrap:
            out.push_back({sc.alice, sc.bob});
            out.push_back({sc.bob, sc.alice});
            break;
        case ProtocolKind::multi_party:
            for (const auto& a : sc.digraph.arcs) out.push_back({a.from, a.to});
            break;
        case ProtocolKind::broker:
            for (const auto& in : sc.digraph.arcs) {
                if (in.to != sc.broker) continue;
                for (const auto& o : sc.digraph.arcs) {
                    if (o.from != sc.broker || o.chain != in.chain) continue;
                    out.push_back({in.from, o.to});
                    if (in.value > o.value) out.push_back({in.from, sc.broker});
                }
            }
            break;
        case ProtocolKind::auction:
            break;  // handled by the bid-theft checks
    }
    return out;
}

std::vector<std::vector<Directive>> party_assignments(
    const ProtocolDriver& driver, const PartyId& party,
    const std::vector<Obligation>& obls, const CheckBounds& bounds) {
    const Scenario& sc = driver.scenario();
    int tpd = sc.ticks_per_delta;

    // option lists per obligation; index 0 is "comply"
    std::vector<std::vector<Directive>> options;
    std::vector<int> obl_ids;
    for (const auto& o : obls) {
        if (o.party != party) continue;
        std::vector<Directive> opts;
        Directive omit;
        omit.obligation_id = o.id;
        omit.kind = DirectiveKind::omit;
        opts.push_back(omit);
        if (bounds.include_delays) {
            for (int k = 1; k <= bounds.max_delay; ++k) {
                Directive d;
                d.obligation_id = o.id;
                d.kind = DirectiveKind::delay;
                d.delay = k * tpd;
                opts.push_back(d);
            }
        }
        if (o.cls == "declare") {
            for (auto kind : {DirectiveKind::wrong_key, DirectiveKind::one_sided,
                              DirectiveKind::wrong_key_one_sided}) {
                if (kind == DirectiveKind::wrong_key) {
                    Directive d;
                    d.obligation_id = o.id;
                    d.kind = kind;
                    opts.push_back(d);
                } else {
                    for (const char* ch : {"coin", "ticket"}) {
                        Directive d;
                        d.obligation_id = o.id;
                        d.kind = kind;
                        d.chain = ch;
                        opts.push_back(d);
                    }
                }
            }
        }
        if (o.cls == "phase4" || o.cls == "release") {
            auto ins = sc.digraph.in_arcs(party);
            if (ins.size() >= 2) {
                for (const Arc* a : ins) {
                    Directive d;
                    d.obligation_id = o.id;
                    d.kind = DirectiveKind::withhold_arcs;
                    d.arcs = {{a->from, a->to}};
                    opts.push_back(d);
                }
            }
        }
        options.push_back(std::move(opts));
        obl_ids.push_back(o.id);
    }

    // odometer over (1 + |opts|) choices per obligation, skipping all-comply
    std::vector<std::vector<Directive>> result;
    std::vector<size_t> idx(options.size(), 0);
    while (true) {
        bool all_comply = true;
        std::vector<Directive> dirs;
        for (size_t i = 0; i < options.size(); ++i) {
            if (idx[i] == 0) continue;
            all_comply = false;
            dirs.push_back(options[i][idx[i] - 1]);
        }
        if (!all_comply) result.push_back(std::move(dirs));
        size_t pos = 0;
        while (pos < idx.size()) {
            if (++idx[pos] <= options[pos].size()) break;
            idx[pos++] = 0;
        }
        if (pos == idx.size()) break;
        if (options.empty()) break;
    }
    return result;
}

}  // namespace

std::vector<StrategyProfile> enumerate_profiles(const ProtocolDriver& driver,
                                                const CheckBounds& bounds,
                                                bool* truncated) {
    if (truncated) *truncated = false;
    auto obls = driver.obligations();
    auto parties = driver.parties();
    std::sort(parties.begin(), parties.end());

    std::map<PartyId, std::vector<std::vector<Directive>>> per_party;
    for (const auto& p : parties)
        per_party[p] = party_assignments(driver, p, obls, bounds);

    std::vector<StrategyProfile> out;
    out.push_back({});  // all-compliant first

    // deviator subsets of size 1..max_deviators, lexicographic
    std::function<void(size_t, std::vector<PartyId>&)> rec = [&](size_t start,
                                                                 std::vector<PartyId>& chosen) {
        if (!chosen.empty()) {
            // cross product of the chosen parties' assignments
            std::vector<size_t> idx(chosen.size(), 0);
            while (true) {
                StrategyProfile prof;
                for (size_t i = 0; i < chosen.size(); ++i)
                    prof.directives[chosen[i]] = per_party[chosen[i]][idx[i]];
                if (out.size() >= bounds.cap) {
                    if (truncated) *truncated = true;
                    return;
                }
                out.push_back(std::move(prof));
                size_t pos = chosen.size();
                while (pos > 0) {
                    if (++idx[pos - 1] < per_party[chosen[pos - 1]].size()) break;
                    idx[--pos] = 0;
                }
                if (pos == 0) break;
            }
        }
        if (chosen.size() >= size_t(bounds.max_deviators)) return;
        for (size_t i = start; i < parties.size(); ++i) {
            if (per_party[parties[i]].empty()) continue;
            chosen.push_back(parties[i]);
            rec(i + 1, chosen);
            chosen.pop_back();
            if (truncated && *truncated) return;
        }
    };
    std::vector<PartyId> chosen;
    rec(0, chosen);
    return out;
}

bool zero_sum(const RunResult& r) {
    Amount principal = 0, premium = 0;
    for (const auto& [_, p] : r.payoffs) {
        principal += p.principal_delta;
        premium += p.premium_delta;
    }
    return principal == 0 && premium == 0;
}

Verdict check_safety(const ProtocolDriver& driver, const RunResult& run,
                     const StrategyProfile& profile) {
    Verdict v;
    v.property = "safety";
    v.scenario = driver.scenario().name;
    v.profile = profile;
    v.trace_hash = run.trace_hash;
    v.pass = true;

    const Scenario& sc = driver.scenario();
    if (sc.kind == ProtocolKind::auction) {
        // no compliant bidder's bid can be stolen: a bid is either refunded
        // or exchanged for the tickets
        for (const auto& [b, amt] : sc.bids) {
            (void)amt;
            if (profile.deviating(b)) continue;
            bool placed = false, refunded = false, taken = false, got_tickets = false;
            for (const auto& e : run.events) {
                if (e.kind == EventKind::bid && e.party == b) placed = true;
                if (e.kind == EventKind::refund && e.detail == "bid" && e.party == b)
                    refunded = true;
                if (e.kind == EventKind::redeem && e.detail == "winning-bid" && e.party == b)
                    taken = true;
                if (e.kind == EventKind::redeem && e.chain == "ticket" && e.counterparty == b)
                    got_tickets = true;
            }
            if (!placed) continue;
            bool ok = refunded ? (!taken) : (taken && got_tickets);
            if (!ok) {
                v.pass = false;
                v.detail = "bid of compliant " + b + " stolen";
                return v;
            }
        }
        return v;
    }

    auto transfers = expected_transfers(driver);
    for (const auto& p : driver.parties()) {
        if (profile.deviating(p)) continue;
        bool transferred_out = false;
        for (const auto& e : run.events)
            if (e.kind == EventKind::redeem && e.party == p) transferred_out = true;
        bool all_incoming = true;
        for (const auto& tr : transfers) {
            if (tr.to != p) continue;
            bool got = false;
            for (const auto& e : run.events)
                if (e.kind == EventKind::redeem && e.party == tr.from && e.counterparty == p)
                    got = true;
            if (!got) all_incoming = false;
        }
        if (transferred_out && !all_incoming) {
            v.pass = false;
            v.detail = p + " transferred an outgoing asset without receiving all incoming";
            return v;
        }
    }
    return v;
}

Verdict check_hedged(const ProtocolDriver& driver, const RunResult& run,
                     const StrategyProfile& profile) {
    Verdict v;
    v.property = "hedged";
    v.scenario = driver.scenario().name;
    v.profile = profile;
    v.trace_hash = run.trace_hash;
    v.pass = true;
    for (const auto& p : driver.parties()) {
        if (profile.deviating(p)) continue;
        auto it = run.payoffs.find(p);
        if (it == run.payoffs.end()) continue;
        const auto& pay = it->second;
        if (driver.has_activation_slots() && pay.escrow_trading_delta < 0) {
            v.pass = false;
            std::ostringstream os;
            os << p << " escrow/trading premium delta " << pay.escrow_trading_delta << " < 0";
            v.detail = os.str();
            return v;
        }
        Amount floor = driver.hedged_floor(p) * Amount(pay.escrowed_unredeemed);
        if (pay.premium_delta < floor) {
            v.pass = false;
            std::ostringstream os;
            os << p << " compensated " << pay.premium_delta << " for "
               << pay.escrowed_unredeemed << " locked principal(s), needs >= " << floor;
            v.detail = os.str();
            return v;
        }
    }
    return v;
}

Verdict check_liveness(const ProtocolDriver& driver, CryptoSuite& suite) {
    Verdict v;
    v.property = "liveness";
    v.scenario = driver.scenario().name;
    v.pass = true;
    RunResult run = driver.run({}, suite);
    v.trace_hash = run.trace_hash;
    if (!run.quiescent) {
        v.pass = false;
        v.detail = "world not quiescent at horizon";
        return v;
    }
    for (const auto& e : run.events) {
        if (e.kind == EventKind::award_premium) {
            v.pass = false;
            v.detail = "premium forfeited in the all-compliant run: " + e.detail;
            return v;
        }
    }
    for (const auto& tr : expected_transfers(driver)) {
        bool got = false;
        for (const auto& e : run.events)
            if (e.kind == EventKind::redeem && e.party == tr.from && e.counterparty == tr.to)
                got = true;
        if (!got) {
            v.pass = false;
            v.detail = "intended transfer " + tr.from + "->" + tr.to + " did not happen";
            return v;
        }
    }
    if (driver.scenario().kind == ProtocolKind::auction) {
        bool complete = false, ticket_out = false;
        for (const auto& e : run.events) {
            if (e.kind == EventKind::settle && e.detail == "complete") complete = true;
            if (e.kind == EventKind::redeem && e.chain == "ticket") ticket_out = true;
        }
        if (!complete || !ticket_out) {
            v.pass = false;
            v.detail = "auction did not settle cleanly";
        }
    }
    return v;
}

CheckSummary check_all(const ProtocolDriver& driver, const CheckBounds& bounds,
                       CryptoSuite& suite, FaultFlags faults,
                       std::size_t keep_counterexamples) {
    CheckSummary s;
    auto lv = check_liveness(driver, suite);
    s.liveness_pass = lv.pass;
    s.liveness_detail = lv.detail;
    auto profiles = enumerate_profiles(driver, bounds, &s.truncated);
    for (const auto& prof : profiles) {
        RunResult run = driver.run(prof, suite, faults);
        if (!zero_sum(run))
            throw std::logic_error("zero-sum violated under profile " +
                                   prof.describe(driver.obligations()));
        auto sv = check_safety(driver, run, prof);
        auto hv = check_hedged(driver, run, prof);
        if (!sv.pass) {
            ++s.safety_failures;
            if (s.counterexamples.size() < keep_counterexamples) s.counterexamples.push_back(sv);
        }
        if (!hv.pass) {
            ++s.hedged_failures;
            if (s.counterexamples.size() < keep_counterexamples) s.counterexamples.push_back(hv);
        }
        ++s.profiles_run;
    }
    return s;
}

}  // namespace hedgesim
