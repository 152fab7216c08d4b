#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hedgesim/contracts.hpp"
#include "hedgesim/sim.hpp"
#include "test_oracles.hpp"

using namespace hedgesim;
using hedgesim::testing::make_digraph;

namespace {

std::shared_ptr<SwapDigraph> tiny_graph() {
    auto g = std::make_shared<SwapDigraph>(make_digraph(2, {{0, 1}, {1, 0}}));
    g->leaders = {"a"};
    return g;
}

EscrowContract& simple_escrow(World& w, CryptoSuite& suite, const Digest32& h,
                              Tick escrow_ddl, Tick redeem_ddl) {
    auto& c = w.add_contract<EscrowContract>("main:a->b", "main");
    c.legs = {{"a", "b", true, "a", 0, false}};
    c.lots = {{"asset", 100, "a", "b"}};
    c.escrow_party = "a";
    c.escrow_deadline = escrow_ddl;
    c.redeem_deadline = redeem_ddl;
    c.hashlocks = {h};
    c.graph = tiny_graph();
    c.expiry_anchor = 0;
    c.valid_heads = {};
    (void)suite;
    return c;
}

}  // namespace

TEST_CASE("advance with no actions only processes timeouts") {
    auto suite = make_fast_crypto(1);
    World w(*suite, 1);
    w.add_chain("main");
    w.run_to(3);
    CHECK(w.now() == 3);
    w.begin_tick();
    w.apply_actions();
    w.end_tick();
    CHECK(w.now() == 4);
    CHECK(w.events().empty());
}

TEST_CASE("same-tick actions apply in party order per chain") {
    auto suite = make_fast_crypto(2);
    World w(*suite, 1);
    w.add_chain("main");
    w.fund("main", "a", 10);
    w.fund("main", "b", 10);
    auto& c = w.add_contract<EscrowContract>("main:x", "main");
    c.escrow_deadline = 100;
    c.redeem_deadline = 100;
    c.graph = tiny_graph();
    PremiumSlot s1;
    s1.depositor = "b";
    s1.amount = 1;
    s1.deposit_deadline = 100;
    s1.forfeit_deadline = 100;
    s1.success = {CondKind::principal_redeemed, -1};
    c.slots.push_back(s1);
    PremiumSlot s2 = s1;
    s2.depositor = "a";
    c.slots.push_back(s2);

    w.begin_tick();
    // submitted b first, a second; application order is by party id
    Action b;
    b.kind = ActionKind::deposit_premium;
    b.party = "b";
    b.chain = "main";
    b.contract = "main:x";
    b.slot = 0;
    b.amount = 1;
    w.submit(b);
    Action a = b;
    a.party = "a";
    a.slot = 1;
    w.submit(a);
    w.apply_actions();
    w.end_tick();

    REQUIRE(w.events().size() == 2);
    CHECK(w.events()[0].party == "a");
    CHECK(w.events()[1].party == "b");
}

TEST_CASE("escrow unredeemed through tick 3 refunds at tick 4") {
    auto suite = make_fast_crypto(3);
    World w(*suite, 1);
    w.add_chain("main");
    Secret s = suite->derive_secret("s");
    auto& c = simple_escrow(w, *suite, make_hashlock(*suite, s), 1, 4);

    w.begin_tick();
    Action e;
    e.kind = ActionKind::escrow_principal;
    e.party = "a";
    e.chain = "main";
    e.contract = c.id();
    w.submit(e);
    w.apply_actions();
    w.end_tick();
    CHECK(c.escrowed);

    w.run_to(4);
    CHECK_FALSE(c.refunded);  // nothing refunded through the end of tick 3
    w.begin_tick();           // tick 4 timeout processing
    CHECK(c.refunded);
    w.apply_actions();
    w.end_tick();
    const Event& last = w.events().back();
    CHECK(last.kind == EventKind::refund);
    CHECK(last.tick == 4);
}

TEST_CASE("visibility: one Delta delay, own submissions immediate") {
    auto suite = make_fast_crypto(4);
    World w(*suite, 1);
    w.add_chain("main");
    Event e;
    e.chain = "main";
    e.kind = EventKind::bid;
    e.party = "a";
    w.begin_tick();
    w.emit(e);  // tick 0
    w.apply_actions();
    w.end_tick();

    CHECK(w.visible_events("b", "main", 1).size() == 1);   // tick 0 at tick 1
    CHECK(w.visible_events("b", "main", 0).empty());       // not at tick 0
    CHECK(w.visible_events("a", "main", 0).size() == 1);   // own submission

    w.begin_tick();
    Event e1 = e;
    w.emit(e1);  // tick 1
    w.apply_actions();
    w.end_tick();
    CHECK(w.visible_events("b", "main", 1).size() == 1);   // tick-1 event hidden
    CHECK(w.visible_events("a", "main", 1).size() == 2);

    CHECK_THROWS_AS(w.visible_events("a", "nochain", 1), std::invalid_argument);
}

TEST_CASE("visibility at finer tick granularity") {
    auto suite = make_fast_crypto(5);
    World w(*suite, 2);  // two ticks per Delta
    w.add_chain("main");
    Event e;
    e.chain = "main";
    e.kind = EventKind::bid;
    e.party = "a";
    w.begin_tick();
    w.emit(e);
    w.apply_actions();
    w.end_tick();
    CHECK(w.visible_events("b", "main", 1).empty());      // half a Delta old
    CHECK(w.visible_events("b", "main", 2).size() == 1);  // one Delta old
    CHECK(w.visible_events("a", "main", 0).size() == 1);
}

TEST_CASE("conservation holds across deposits, awards and refunds") {
    auto suite = make_fast_crypto(6);
    World w(*suite, 1);
    w.add_chain("main");
    w.fund("main", "a", 50);
    w.fund("main", "b", 50);
    Secret s = suite->derive_secret("s");
    auto& c = simple_escrow(w, *suite, make_hashlock(*suite, s), 2, 5);
    PremiumSlot slot;
    slot.depositor = "b";
    slot.beneficiary = "a";
    slot.amount = 7;
    slot.deposit_deadline = 2;
    slot.success = {CondKind::principal_redeemed, -1};
    slot.forfeit_deadline = 5;
    c.slots.push_back(slot);

    w.begin_tick();
    Action dep;
    dep.kind = ActionKind::deposit_premium;
    dep.party = "b";
    dep.chain = "main";
    dep.contract = c.id();
    dep.slot = 0;
    dep.amount = 7;
    w.submit(dep);
    Action esc;
    esc.kind = ActionKind::escrow_principal;
    esc.party = "a";
    esc.chain = "main";
    esc.contract = c.id();
    w.submit(esc);
    w.apply_actions();
    w.end_tick();  // audits conservation

    CHECK(w.balance("main", "b") == 43);
    w.run_to(6);  // principal refunds, premium forfeits to a
    CHECK(w.balance("main", "a") == 57);
    CHECK(w.balance("main", "b") == 43);
    CHECK(w.all_quiescent());
}

TEST_CASE("deterministic trace hashes") {
    auto run_once = [] {
        auto suite = make_fast_crypto(9);
        World w(*suite, 1);
        w.add_chain("main");
        w.fund("main", "a", 10);
        Secret s = suite->derive_secret("s");
        auto& c = simple_escrow(w, *suite, make_hashlock(*suite, s), 2, 3);
        w.begin_tick();
        Action esc;
        esc.kind = ActionKind::escrow_principal;
        esc.party = "a";
        esc.chain = "main";
        esc.contract = c.id();
        w.submit(esc);
        w.apply_actions();
        w.end_tick();
        w.run_to(5);
        return w.trace_hash();
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("malformed actions are rejected and recorded, not fatal") {
    auto suite = make_fast_crypto(10);
    World w(*suite, 1);
    w.add_chain("main");
    w.begin_tick();
    Action bogus;
    bogus.kind = ActionKind::escrow_principal;
    bogus.party = "z";
    bogus.chain = "main";
    bogus.contract = "no-such-contract";
    w.submit(bogus);
    w.apply_actions();
    w.end_tick();
    REQUIRE(w.events().size() == 1);
    CHECK(w.events()[0].kind == EventKind::reject);
    CHECK(w.events()[0].detail == "unknown-contract");
}
