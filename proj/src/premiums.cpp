#include "hedgesim/premiums.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace hedgesim {

namespace {

std::vector<PartyId> prepend(const PartyId& v, const std::vector<PartyId>& q) {
    std::vector<PartyId> out;
    out.reserve(q.size() + 1);
    out.push_back(v);
    out.insert(out.end(), q.begin(), q.end());
    return out;
}

Amount arc_premium(const SwapDigraph& g, const PartyId& u, const PartyId& v,
                   Amount p) {
    const Arc* a = g.find_arc(u, v);
    return (a && a->premium >= 0) ? a->premium : p;
}

}  // namespace

Amount redemption_premium(const SwapDigraph& g, const std::vector<PartyId>& q,
                          const PartyId& v, Amount p) {
    if (q.empty()) throw std::invalid_argument("redemption_premium: empty path");
    auto vq = prepend(v, q);
    PathShape shape = classify_sequence(g, vq);
    // The deposit carrying this amount sits on arc (v, q.front()).
    Amount base = arc_premium(g, v, q.front(), p);
    if (shape == PathShape::cycle) return base;
    Amount total = base;
    for (const Arc* a : g.in_arcs(v)) {
        auto ext = prepend(a->from, vq);
        PathShape es = classify_sequence(g, ext);
        if (es == PathShape::path || es == PathShape::cycle)
            total += redemption_premium(g, vq, a->from, p);
    }
    return total;
}

Amount leader_redemption_total(const SwapDigraph& g, const PartyId& leader,
                               Amount p) {
    Amount total = 0;
    std::vector<PartyId> q{leader};
    for (const Arc* a : g.in_arcs(leader))
        total += redemption_premium(g, q, a->from, p);
    return total;
}

Amount escrow_premium(const SwapDigraph& g, const PartyId& u, const PartyId& v,
                      Amount p) {
    auto lv = validate_leaders(g);
    if (!lv.ok)
        throw std::invalid_argument("escrow_premium: leaders are not a feedback vertex set");
    std::function<Amount(const PartyId&, const PartyId&)> rec =
        [&](const PartyId& from, const PartyId& to) -> Amount {
        (void)from;
        if (g.is_leader(to)) return leader_redemption_total(g, to, p);
        Amount total = 0;
        for (const Arc* a : g.out_arcs(to)) total += rec(to, a->to);
        return total;
    };
    if (!g.has_arc(u, v)) throw std::invalid_argument("escrow_premium: no such arc");
    return rec(u, v);
}

std::vector<RedemptionDeposit> redemption_cascade(const SwapDigraph& g, Amount p) {
    std::vector<RedemptionDeposit> out;
    std::vector<PartyId> leaders(g.leaders.begin(), g.leaders.end());
    std::sort(leaders.begin(), leaders.end());

    auto arc_key = [](const Arc* a) {
        return std::tuple<std::string, PartyId, PartyId>(a->chain, a->from, a->to);
    };

    for (size_t li = 0; li < leaders.size(); ++li) {
        const PartyId& leader = leaders[li];
        // arrival wave and carried path per arc, for this leader's premium
        std::map<std::pair<PartyId, PartyId>, std::pair<int, std::vector<PartyId>>> arrived;
        std::map<PartyId, bool> done;
        done[leader] = true;

        auto deposit_on = [&](const Arc* a, const std::vector<PartyId>& path, int wave) {
            RedemptionDeposit d;
            d.leader_index = int(li);
            d.leader = leader;
            d.on_from = a->from;
            d.on_to = a->to;
            d.chain = a->chain;
            d.path = path;
            d.amount = redemption_premium(g, path, a->from, p);
            d.wave = wave;
            d.depositor = a->to;
            d.beneficiary = a->from;
            out.push_back(d);
            arrived[{a->from, a->to}] = {wave, path};
        };

        // wave 0: the leader's own incoming arcs
        {
            auto ins = g.in_arcs(leader);
            std::sort(ins.begin(), ins.end(),
                      [&](const Arc* a, const Arc* b) { return arc_key(a) < arc_key(b); });
            for (const Arc* a : ins) deposit_on(a, {leader}, 0);
        }

        for (int wave = 1; wave <= int(g.vertices.size()); ++wave) {
            for (const auto& v : g.vertices) {
                if (done.count(v)) continue;
                // first visible premium on an outgoing arc; ties break on arc order
                const Arc* best = nullptr;
                std::pair<int, std::vector<PartyId>> best_arr;
                for (const Arc* a : g.out_arcs(v)) {
                    auto it = arrived.find({a->from, a->to});
                    if (it == arrived.end() || it->second.first >= wave) continue;
                    if (!best || it->second.first < best_arr.first ||
                        (it->second.first == best_arr.first &&
                         arc_key(a) < arc_key(best))) {
                        best = a;
                        best_arr = it->second;
                    }
                }
                if (!best) continue;
                done[v] = true;  // later premiums for this hashkey are ignored
                auto vq = prepend(v, best_arr.second);
                if (classify_sequence(g, vq) != PathShape::path) continue;
                auto ins = g.in_arcs(v);
                std::sort(ins.begin(), ins.end(),
                          [&](const Arc* a, const Arc* b) { return arc_key(a) < arc_key(b); });
                for (const Arc* a : ins) {
                    auto ext = prepend(a->from, vq);
                    PathShape es = classify_sequence(g, ext);
                    if (es == PathShape::path || es == PathShape::cycle)
                        deposit_on(a, vq, wave);
                }
            }
        }
    }
    return out;
}

PremiumSchedule make_premium_schedule(const SwapDigraph& g, Amount p) {
    PremiumSchedule s;
    s.base_premium = p;
    s.redemption = redemption_cascade(g, p);
    for (const auto& a : g.arcs)
        s.escrow[{a.from, a.to}] = escrow_premium(g, a.from, a.to, p);
    for (const auto& l : g.leaders)
        s.leader_totals[l] = leader_redemption_total(g, l, p);
    return s;
}

BrokerPremiums broker_premiums(const SwapDigraph& g, const PartyId& broker,
                               Amount p, int rounds) {
    if (rounds < 1) throw std::invalid_argument("broker_premiums: rounds < 1");
    if (g.in_arcs(broker).empty() || g.out_arcs(broker).empty())
        throw std::invalid_argument("broker_premiums: broker needs in and out arcs");
    BrokerPremiums bp;
    bp.broker = broker;
    bp.rounds = rounds;
    for (const auto& v : g.vertices)
        bp.leader_totals[v] = leader_redemption_total(g, v, p);

    // phase r: T_r(v,w) = R_w(w); earlier phases: T_k(v,w) = T_{k+1}(w)
    bp.trading.resize(rounds);
    for (int k = rounds; k >= 1; --k) {
        auto& tk = bp.trading[k - 1];
        for (const Arc* a : g.out_arcs(broker)) {
            if (k == rounds) {
                tk[{a->from, a->to}] = bp.leader_totals[a->to];
            } else {
                Amount tnext = 0;
                for (const Arc* b : g.out_arcs(a->to))
                    tnext += bp.trading[k][{b->from, b->to}];
                // a counterparty with no phase-(k+1) transfers owes nothing further
                tk[{a->from, a->to}] = tnext > 0 ? tnext : bp.leader_totals[a->to];
            }
        }
    }
    Amount t1_broker = 0;
    for (const Arc* a : g.out_arcs(broker)) t1_broker += bp.trading[0][{a->from, a->to}];
    for (const Arc* a : g.in_arcs(broker)) bp.escrow[{a->from, a->to}] = t1_broker;

    bp.redemption = redemption_cascade(g, p);
    return bp;
}

int bootstrap_rounds(Amount asset_a, Amount asset_b, Amount p_divisor,
                     Amount initial_premium) {
    if (asset_a <= 0 || asset_b <= 0 || p_divisor <= 1 || initial_premium <= 0)
        throw std::invalid_argument("bootstrap_rounds: need A,B,p0 > 0 and P > 1");
    __int128 total = __int128(asset_a) + asset_b;
    __int128 bound = initial_premium;
    int r = 0;
    while (total > bound) {
        bound *= p_divisor;
        ++r;
        if (r > 64) throw std::overflow_error("bootstrap_rounds: no feasible r");
    }
    return r;
}

std::vector<BootstrapRound> bootstrap_amounts(Amount asset_a, Amount asset_b,
                                              Amount p_divisor, int rounds) {
    if (rounds < 1) throw std::invalid_argument("bootstrap_amounts: rounds < 1");
    std::vector<BootstrapRound> out;
    std::int64_t pj = 1;
    std::vector<std::int64_t> powers(rounds + 1, 1);
    for (int j = 1; j <= rounds; ++j) {
        pj *= p_divisor;
        powers[j] = pj;
    }
    for (int j = rounds; j >= 1; --j) {
        BootstrapRound r;
        r.round = j;
        r.leader_amount = Rational(std::int64_t(j) * asset_a + asset_b, powers[j]);
        r.follower_amount = Rational(asset_a, powers[j]);
        out.push_back(r);
    }
    return out;
}

}  // namespace hedgesim
