#pragma once

#include <map>
#include <utility>
#include <vector>

#include "hedgesim/amount.hpp"
#include "hedgesim/graph.hpp"

namespace hedgesim {

// Redemption premium R_i(q, v): amount a party deposits for hashkey k_i on
// the arc (v, q.front()), where q is the path the matching hashkey will carry.
// Base case: v||q closes a cycle (v is the leader). Otherwise p plus what v
// cascades onto its own incoming arcs; arcs whose extension is neither a
// path nor a cycle receive no premium and contribute nothing.
Amount redemption_premium(const SwapDigraph& g, const std::vector<PartyId>& q,
                          const PartyId& v, Amount p);

// R(L): sum of the leader's own deposits over its incoming arcs.
Amount leader_redemption_total(const SwapDigraph& g, const PartyId& leader,
                               Amount p);

// Escrow premium E(u, v): leader's R total if v is a leader, else the sum
// over v's outgoing arcs. Requires the leaders to be a feedback vertex set.
Amount escrow_premium(const SwapDigraph& g, const PartyId& u, const PartyId& v,
                      Amount p);

// One entry of the deterministic redemption premium cascade: the deposit a
// compliant party makes on arc (on_from, on_to) for `leader`'s hashkey,
// `wave` observation steps after the phase opens.
struct RedemptionDeposit {
    int leader_index = 0;
    PartyId leader;
    PartyId on_from;
    PartyId on_to;
    std::string chain;
    std::vector<PartyId> path;  // starts at on_to, ends at leader
    Amount amount = 0;
    int wave = 0;
    PartyId depositor;    // on_to
    PartyId beneficiary;  // on_from
};

// First-premium-wins cascade for every leader, in deterministic order.
// Ties between simultaneous arrivals break on (chain, from, to).
std::vector<RedemptionDeposit> redemption_cascade(const SwapDigraph& g, Amount p);

struct PremiumSchedule {
    Amount base_premium = 0;
    std::vector<RedemptionDeposit> redemption;
    std::map<std::pair<PartyId, PartyId>, Amount> escrow;  // E(u,v)
    std::map<PartyId, Amount> leader_totals;               // R(L)
};
PremiumSchedule make_premium_schedule(const SwapDigraph& g, Amount p);

// Broker premiums: T_r(v,w) = R_w(w); T_k(v,w) = T_{k+1}(w) for k < r;
// E(u,v) = T_1(v). Escrow arcs enter the broker, trading arcs leave it and
// repeat each round.
struct BrokerPremiums {
    PartyId broker;
    int rounds = 1;
    // trading[k-1] holds the phase-k premiums T_k(v,w)
    std::vector<std::map<std::pair<PartyId, PartyId>, Amount>> trading;
    std::map<std::pair<PartyId, PartyId>, Amount> escrow;
    std::map<PartyId, Amount> leader_totals;
    std::vector<RedemptionDeposit> redemption;
};
BrokerPremiums broker_premiums(const SwapDigraph& g, const PartyId& broker,
                               Amount p, int rounds = 1);

// Smallest r with (A+B)/P^r <= p0.
int bootstrap_rounds(Amount asset_a, Amount asset_b, Amount p_divisor,
                     Amount initial_premium);

struct BootstrapRound {
    int round = 0;            // r down to 1, outermost first
    Rational leader_amount;   // (jA+B)/P^j, deposited first in its round
    Rational follower_amount; // A/P^j
};
std::vector<BootstrapRound> bootstrap_amounts(Amount asset_a, Amount asset_b,
                                              Amount p_divisor, int rounds);

}  // namespace hedgesim
