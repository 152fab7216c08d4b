#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hedgesim/checker.hpp"
#include "hedgesim/protocols.hpp"
#include "hedgesim/scenario.hpp"

using namespace hedgesim;

namespace {

StrategyProfile omit(const ProtocolDriver& d, const PartyId& p, const std::string& cls) {
    for (const auto& o : d.obligations()) {
        if (o.party == p && o.cls == cls) {
            StrategyProfile prof;
            Directive dir;
            dir.obligation_id = o.id;
            dir.kind = DirectiveKind::omit;
            prof.directives[p] = {dir};
            return prof;
        }
    }
    throw std::logic_error("no such obligation: " + p + "/" + cls);
}

StrategyProfile merge(StrategyProfile a, const StrategyProfile& b) {
    for (const auto& [p, dirs] : b.directives)
        for (const auto& d : dirs) a.directives[p].push_back(d);
    return a;
}

int count_events(const RunResult& r, EventKind k) {
    int n = 0;
    for (const auto& e : r.events)
        if (e.kind == k) ++n;
    return n;
}

const Event* find_event(const RunResult& r, EventKind k,
                        const std::string& detail_prefix = "") {
    for (const auto& e : r.events)
        if (e.kind == k && e.detail.rfind(detail_prefix, 0) == 0) return &e;
    return nullptr;
}

}  // namespace

// ---- hedged two-party ------------------------------------------------------

TEST_CASE("hedged two-party: compliant run swaps and refunds premiums") {
    auto sc = two_party_hedged_scenario(2, 3);
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::redeem) == 2);
    CHECK(count_events(r, EventKind::award_premium) == 0);
    CHECK(count_events(r, EventKind::premium_refund) == 2);
    CHECK(count_events(r, EventKind::reject) == 0);
    CHECK(r.payoffs.at("alice").premium_delta == 0);
    CHECK(r.payoffs.at("bob").premium_delta == 0);
    CHECK(r.payoffs.at("alice").principal_delta == 0);  // equal nominal values
    // key ticks: premiums 0/1, escrows 2/3, reveals 4/5
    const Event* reveal = find_event(r, EventKind::reveal_hashkey);
    REQUIRE(reveal);
    CHECK(reveal->tick == 4);
}

TEST_CASE("hedged two-party: liveness at two ticks per Delta") {
    auto sc = two_party_hedged_scenario(2, 3);
    sc.ticks_per_delta = 2;
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::redeem) == 2);
    CHECK(count_events(r, EventKind::award_premium) == 0);
}

TEST_CASE("bob walks away after alice escrows: bob pays alice p_b") {
    auto sc = two_party_hedged_scenario(2, 3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "escrow"), *suite);
    CHECK(r.quiescent);
    // alice's premium refunded at t_be (banana principal never escrowed)
    const Event* guard = find_event(r, EventKind::premium_refund, "guard");
    REQUIRE(guard);
    CHECK(guard->tick == 4);
    // bob's premium forfeits to alice at t_B
    CHECK(r.payoffs.at("alice").premium_delta == 3);
    CHECK(r.payoffs.at("bob").premium_delta == -3);
    CHECK(r.payoffs.at("alice").escrowed_unredeemed == 1);
}

TEST_CASE("alice reneges after bob escrows: net compensation is p_a") {
    auto sc = two_party_hedged_scenario(2, 3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "reveal"), *suite);
    CHECK(r.quiescent);
    // at t_A=5 alice's premium p_a+p_b goes to bob; at t_B=6 bob's p_b to alice
    std::vector<const Event*> awards;
    for (const auto& e : r.events)
        if (e.kind == EventKind::award_premium) awards.push_back(&e);
    REQUIRE(awards.size() == 2);
    CHECK(awards[0]->tick == 5);
    CHECK(awards[0]->amount == 5);
    CHECK(awards[0]->counterparty == "bob");
    CHECK(awards[1]->tick == 6);
    CHECK(awards[1]->amount == 3);
    CHECK(awards[1]->counterparty == "alice");
    CHECK(r.payoffs.at("bob").premium_delta == 2);    // exactly +p_a
    CHECK(r.payoffs.at("alice").premium_delta == -2);  // exactly -p_a
    CHECK(r.payoffs.at("bob").escrowed_unredeemed == 1);
}

TEST_CASE("bob omits his premium: protocol truncates with no losses") {
    auto sc = two_party_hedged_scenario(2, 3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "premium"), *suite);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::escrow_principal) == 0);
    CHECK(count_events(r, EventKind::award_premium) == 0);
    CHECK(r.payoffs.at("alice").premium_delta == 0);
    CHECK(r.payoffs.at("alice").escrowed_unredeemed == 0);
}

TEST_CASE("compliant parties are never rejected in hedged runs") {
    auto sc = two_party_hedged_scenario(2, 3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    CheckBounds bounds;
    bounds.max_deviators = 1;
    bounds.include_delays = true;
    for (const auto& prof : enumerate_profiles(*driver, bounds)) {
        auto r = driver->run(prof, *suite);
        for (const auto& e : r.events) {
            if (e.kind != EventKind::reject) continue;
            CHECK(prof.deviating(e.party));
        }
    }
}

// ---- base two-party --------------------------------------------------------

TEST_CASE("base two-party: sore loser leaves alice locked until 3*Delta") {
    auto sc = two_party_base_scenario();
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "escrow"), *suite);
    CHECK(r.quiescent);
    const Event* refund = find_event(r, EventKind::refund);
    REQUIRE(refund);
    CHECK(refund->party == "alice");
    CHECK(refund->tick == 3);  // locked from tick 0 until t_A = 3*Delta
    CHECK(r.payoffs.at("alice").premium_delta == 0);  // zero compensation
    CHECK(r.payoffs.at("alice").escrowed_unredeemed == 1);
}

// ---- bootstrap -------------------------------------------------------------

TEST_CASE("bootstrap r=1..3: compliant runs refund every stack level") {
    for (int r = 1; r <= 3; ++r) {
        auto sc = bootstrap_scenario(1000000, 1000000, 100, r);
        auto res = run_scenario(sc);
        CHECK(res.quiescent);
        CHECK(count_events(res, EventKind::redeem) == 2);
        CHECK(count_events(res, EventKind::award_premium) == 0);
        CHECK(count_events(res, EventKind::deposit_premium) == 2 * r);
        CHECK(count_events(res, EventKind::premium_refund) == 2 * r);
    }
}

TEST_CASE("bootstrap: abandoning before the principal forfeits the follower premium") {
    // r=2: if alice never escrows her principal, bob receives her level-2
    // deposit as compensation for his locked level-1 deposit
    auto sc = bootstrap_scenario(100, 100, 10, 2);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "escrow"), *suite);
    CHECK(r.quiescent);
    const Event* award = find_event(r, EventKind::award_premium);
    REQUIRE(award);
    CHECK(award->party == "alice");
    CHECK(award->counterparty == "bob");
    CHECK(award->amount == 1);  // A/P^2
    CHECK(r.payoffs.at("bob").premium_delta == 1);
}

TEST_CASE("bootstrap: abandoning a mid-ladder deposit still compensates") {
    // alice walks away before her banana level-1 deposit; bob's level-1
    // deposit stays guarded by the ladder and her level-2 premium pays him
    // for the lockup
    auto sc = bootstrap_scenario(100, 100, 10, 2);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "deposit:banana-L1"), *suite);
    CHECK(r.quiescent);
    CHECK(r.payoffs.at("bob").premium_delta == 1);    // A/P^2
    CHECK(r.payoffs.at("alice").premium_delta == -1);
}

TEST_CASE("bootstrap: per-premium lock-up risk window is constant in r") {
    // every premium resolves within one swap execution plus Delta of its
    // deposit, no matter how many rounds precede the swap; measured on the
    // classic renege-at-reveal worst case
    std::vector<Tick> widest;
    for (int rr = 1; rr <= 3; ++rr) {
        auto sc = bootstrap_scenario(1000000, 1000000, 100, rr);
        auto driver = make_driver(sc);
        auto suite = make_fast_crypto(sc.seed);
        auto r = driver->run(omit(*driver, "alice", "reveal"), *suite);
        CHECK(r.quiescent);
        std::map<std::pair<std::string, int>, Tick> deposited;
        Tick w = 0;
        for (const auto& e : r.events) {
            if (e.kind == EventKind::deposit_premium)
                deposited[{e.contract, e.slot}] = e.tick;
            if (e.kind == EventKind::premium_refund || e.kind == EventKind::award_premium) {
                auto it = deposited.find({e.contract, e.slot});
                if (it != deposited.end()) w = std::max(w, e.tick - it->second);
            }
        }
        widest.push_back(w);
    }
    CHECK(widest[0] == widest[1]);
    CHECK(widest[1] == widest[2]);
    CHECK(widest[0] == 5);  // premium deposit through the redeem deadline
}

// ---- multi-party -----------------------------------------------------------

TEST_CASE("3-cycle: compliant run transfers all assets, refunds all premiums") {
    auto sc = cycle_scenario(3);
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::redeem) == 3);
    CHECK(count_events(r, EventKind::award_premium) == 0);
    CHECK(count_events(r, EventKind::reject) == 0);
    for (const auto& [p, pay] : r.payoffs) {
        CHECK(pay.premium_delta == 0);
        CHECK(pay.escrowed_unredeemed == 0);
    }
}

TEST_CASE("hub-and-spoke dilemma: leader neither reveals nor loses") {
    // bob escrows, carol doesn't; alice collects carol's escrow premium,
    // withholds her hashkey, and ends with escrow profit >= 0 and premium
    // cover >= p per locked asset
    auto sc = fig3a_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "carol", "phase3"), *suite);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::redeem) == 0);  // alice withheld
    const auto& alice = r.payoffs.at("alice");
    CHECK(alice.escrow_trading_delta >= 0);
    CHECK(alice.escrow_trading_delta == 4);  // E(carol->alice) forfeited to her
    CHECK(alice.escrowed_unredeemed == 2);
    CHECK(alice.premium_delta >= 2 * 1);
    const auto& bob = r.payoffs.at("bob");
    CHECK(bob.escrow_trading_delta >= 0);
    CHECK(bob.premium_delta >= bob.escrowed_unredeemed * 1);
}

TEST_CASE("3-cycle: phase-4 withholding compensates every escrower with p") {
    auto sc = cycle_scenario(3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    // carol learns the key but never propagates it
    auto r = driver->run(omit(*driver, "carol", "phase4"), *suite);
    CHECK(r.quiescent);
    const auto& bob = r.payoffs.at("bob");
    CHECK(bob.escrowed_unredeemed == 1);
    CHECK(bob.redemption_delta >= 1);
    CHECK(bob.premium_delta >= 1);
    const auto& alice = r.payoffs.at("alice");
    CHECK(alice.premium_delta >= alice.escrowed_unredeemed * 1);
    CHECK(r.payoffs.at("carol").premium_delta <= -1);  // withholder pays
}

TEST_CASE("phase-2 failure: cover chain holds, leaders recover by releasing") {
    auto sc = cycle_scenario(3);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "phase2"), *suite);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::escrow_principal) == 0);
    // the arc missing its redemption premium never activates: its escrow
    // premium is refunded, and the rest of the escrow-premium chain nets
    // zero for every compliant party
    bool saw_inactive = false;
    for (const auto& e : r.events)
        if (e.kind == EventKind::premium_refund && e.detail == "inactive")
            saw_inactive = true;
    CHECK(saw_inactive);
    CHECK(r.payoffs.at("alice").premium_delta >= 0);
    CHECK(r.payoffs.at("carol").premium_delta >= 0);
    CHECK(r.payoffs.at("carol").escrow_trading_delta == 0);  // exact cover
    CHECK(r.payoffs.at("bob").premium_delta <= -1);
    // the leader recovers its redemption premiums by releasing its hashkey
    // on its incoming arcs even though nothing was escrowed
    bool leader_released = false;
    for (const auto& e : r.events)
        if (e.kind == EventKind::reveal_hashkey && e.party == "alice") leader_released = true;
    CHECK(leader_released);
    CHECK(r.payoffs.at("alice").redemption_delta == 0);
}

TEST_CASE("multi-party schedule is published in the trace header") {
    auto sc = cycle_scenario(3);
    auto r = run_scenario(sc);
    CHECK(r.schedule_desc.find("P2@3D") != std::string::npos);
    CHECK(r.schedule_desc.find("P3@6D") != std::string::npos);
    CHECK(r.schedule_desc.find("P4@9D") != std::string::npos);
    bool header = false;
    for (const auto& e : r.events)
        if (e.kind == EventKind::publish && e.tick == 0 &&
            e.detail.find("redeem-deadline") != std::string::npos)
            header = true;
    CHECK(header);
}

// ---- broker ----------------------------------------------------------------

TEST_CASE("broker: compliant run settles the three-way deal") {
    auto sc = broker_scenario(1);
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    CHECK(count_events(r, EventKind::award_premium) == 0);
    CHECK(count_events(r, EventKind::reject) == 0);
    CHECK(r.payoffs.at("alice").principal_delta == 1);    // the margin
    CHECK(r.payoffs.at("bob").principal_delta == 0);      // tickets for coins
    CHECK(r.payoffs.at("carol").principal_delta == -1);   // paid the markup
    for (const auto& [p, pay] : r.payoffs) CHECK(pay.premium_delta == 0);
}

TEST_CASE("broker: bob omits B1 and pays premiums to carol and alice") {
    auto sc = broker_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "escrow"), *suite);
    CHECK(r.quiescent);
    // E(bob->alice) = 6 forfeits to alice; alice's blocked ticket trade
    // forfeits T(alice->carol) = 3 to carol
    const auto& bob = r.payoffs.at("bob");
    const auto& alice = r.payoffs.at("alice");
    const auto& carol = r.payoffs.at("carol");
    CHECK(bob.escrow_trading_delta == -6);
    CHECK(bob.premium_delta < 0);
    CHECK(alice.escrow_trading_delta == 3);  // +6 E, -3 T passthrough
    CHECK(alice.premium_delta >= 0);
    CHECK(carol.premium_delta >= carol.escrowed_unredeemed * 1);
    CHECK(carol.premium_delta > 0);
}

TEST_CASE("broker: bob performs B1 but omits B2, carol is compensated") {
    auto sc = broker_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "bob", "release"), *suite);
    CHECK(r.quiescent);
    const auto& carol = r.payoffs.at("carol");
    CHECK(carol.escrowed_unredeemed == 1);  // her coins locked then refunded
    CHECK(carol.premium_delta >= 1);
    CHECK(r.payoffs.at("bob").premium_delta <= -1);
    CHECK(r.payoffs.at("alice").premium_delta >= 0);
}

TEST_CASE("broker: alice omits A1 and pays carol on the ticket chain") {
    auto sc = broker_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "trade:ticket"), *suite);
    CHECK(r.quiescent);
    const Event* award = find_event(r, EventKind::award_premium, "trading:");
    REQUIRE(award);
    CHECK(award->chain == "ticket");
    CHECK(award->party == "alice");
    CHECK(award->counterparty == "carol");
    CHECK(award->amount == 3);
    CHECK(r.payoffs.at("carol").premium_delta >= 1);
    CHECK(r.payoffs.at("bob").premium_delta >= r.payoffs.at("bob").escrowed_unredeemed);
}

TEST_CASE("broker: alice omits A2 and pays bob on the coin chain") {
    auto sc = broker_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "trade:coin"), *suite);
    CHECK(r.quiescent);
    const Event* award = find_event(r, EventKind::award_premium, "trading:");
    REQUIRE(award);
    CHECK(award->chain == "coin");
    CHECK(award->counterparty == "bob");
    CHECK(r.payoffs.at("bob").premium_delta >= r.payoffs.at("bob").escrowed_unredeemed);
}

TEST_CASE("broker: alice omits A3 and pays both on their own chains") {
    auto sc = broker_scenario(1);
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "release"), *suite);
    CHECK(r.quiescent);
    const auto& bob = r.payoffs.at("bob");
    const auto& carol = r.payoffs.at("carol");
    CHECK(bob.escrowed_unredeemed == 1);
    CHECK(carol.escrowed_unredeemed == 1);
    CHECK(bob.premium_delta >= 1);
    CHECK(carol.premium_delta >= 1);
    CHECK(r.payoffs.at("alice").premium_delta <= -2);
    // compensation lands on each party's own blockchain
    bool bob_ticket = false, carol_coin = false;
    for (const auto& e : r.events) {
        if (e.kind == EventKind::award_premium && e.counterparty == "bob" &&
            e.chain == "ticket")
            bob_ticket = true;
        if (e.kind == EventKind::award_premium && e.counterparty == "carol" &&
            e.chain == "coin")
            carol_coin = true;
    }
    CHECK(bob_ticket);
    CHECK(carol_coin);
}

// ---- auction ----------------------------------------------------------------

TEST_CASE("auction: compliant run sells to the high bidder") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}});
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    const Event* settle = find_event(r, EventKind::settle, "complete");
    REQUIRE(settle);
    CHECK(r.payoffs.at("bob").principal_delta == -100 + 50);   // paid, got tickets
    CHECK(r.payoffs.at("carol").principal_delta == 0);         // refunded
    CHECK(r.payoffs.at("alice").principal_delta == 100 - 50);
    for (const auto& [p, pay] : r.payoffs) CHECK(pay.premium_delta == 0);
}

TEST_CASE("auction: one-sided declaration is healed by a compliant bidder") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}});
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    for (const char* chain : {"coin", "ticket"}) {
        StrategyProfile prof;
        Directive d;
        d.obligation_id = -1;
        for (const auto& o : driver->obligations())
            if (o.party == "alice" && o.cls == "declare") d.obligation_id = o.id;
        d.kind = DirectiveKind::one_sided;
        d.chain = chain;
        prof.directives["alice"] = {d};
        auto r = driver->run(prof, *suite);
        CHECK(r.quiescent);
        const Event* settle = find_event(r, EventKind::settle, "complete");
        REQUIRE(settle);
        CHECK(r.payoffs.at("bob").principal_delta == -50);  // still wins
    }
}

TEST_CASE("auction: wrong key declared refunds all bids plus p each") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}});
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    StrategyProfile prof;
    Directive d;
    for (const auto& o : driver->obligations())
        if (o.party == "alice" && o.cls == "declare") d.obligation_id = o.id;
    d.kind = DirectiveKind::wrong_key;
    prof.directives["alice"] = {d};
    auto r = driver->run(prof, *suite);
    CHECK(r.quiescent);
    CHECK(find_event(r, EventKind::settle, "refund-all"));
    CHECK(r.payoffs.at("bob").premium_delta == 1);
    CHECK(r.payoffs.at("carol").premium_delta == 1);
    CHECK(r.payoffs.at("alice").premium_delta == -2);
    // tickets follow the single published key
    CHECK(r.payoffs.at("carol").principal_delta == 50);
    CHECK(r.payoffs.at("bob").principal_delta == 0);  // bid refunded
}

TEST_CASE("auction: omitted declaration refunds everything") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}});
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "alice", "declare"), *suite);
    CHECK(r.quiescent);
    CHECK(find_event(r, EventKind::settle, "refund-all"));
    CHECK(r.payoffs.at("bob").premium_delta == 1);
    CHECK(r.payoffs.at("carol").premium_delta == 1);
    // nobody's bid is taken, tickets return to alice
    CHECK(r.payoffs.at("bob").principal_delta == 0);
    CHECK(r.payoffs.at("carol").principal_delta == 0);
    CHECK(r.payoffs.at("alice").principal_delta == 0);
}

TEST_CASE("auction: losing bidder cannot block the sale") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}});
    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r = driver->run(omit(*driver, "carol", "challenge"), *suite);
    CHECK(r.quiescent);
    CHECK(find_event(r, EventKind::settle, "complete"));
    CHECK(r.payoffs.at("bob").principal_delta == -50);
}

TEST_CASE("auction: three bidders, endowment n*p") {
    auto sc = auction_scenario({{"bob", 100}, {"carol", 90}, {"dave", 95}});
    auto r = run_scenario(sc);
    CHECK(r.quiescent);
    CHECK(find_event(r, EventKind::settle, "complete"));
    CHECK(r.payoffs.at("bob").principal_delta == -50);  // bob still highest

    auto driver = make_driver(sc);
    auto suite = make_fast_crypto(sc.seed);
    auto r2 = driver->run(omit(*driver, "alice", "declare"), *suite);
    CHECK(r2.payoffs.at("bob").premium_delta == 1);
    CHECK(r2.payoffs.at("carol").premium_delta == 1);
    CHECK(r2.payoffs.at("dave").premium_delta == 1);
    CHECK(r2.payoffs.at("alice").premium_delta == -3);
}

// ---- cross-cutting -----------------------------------------------------------

TEST_CASE("all-compliant runs replay to identical trace hashes") {
    std::vector<Scenario> scs = {two_party_hedged_scenario(2, 3), cycle_scenario(3),
                                 fig3a_scenario(), broker_scenario(),
                                 auction_scenario({{"bob", 9}, {"carol", 7}})};
    for (const auto& sc : scs) {
        auto a = run_scenario(sc);
        auto b = run_scenario(sc);
        CHECK(a.trace_hash == b.trace_hash);
        CHECK(zero_sum(a));
    }
}
