#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hedgesim/amount.hpp"
#include "hedgesim/crypto.hpp"

namespace hedgesim {

enum class EventKind {
    publish,
    deposit_premium,
    activate_premium,
    escrow_principal,
    reveal_hashkey,
    redeem,
    refund,           // principal back to owner
    premium_refund,   // slot back to depositor
    award_premium,    // slot to beneficiary
    trade,            // broker leg committed
    bid,
    endow,
    settle,
    reject,
};

const char* to_string(EventKind k);

struct Event {
    Tick tick = 0;
    std::string chain;
    std::string contract;
    EventKind kind = EventKind::publish;
    PartyId party;         // actor / depositor / owner
    PartyId counterparty;  // recipient / beneficiary, when applicable
    Amount amount = 0;
    int slot = -1;
    int hashlock = -1;
    std::vector<PartyId> path;
    std::string detail;
    std::optional<Hashkey> key;  // recorded hashkey, for reveal events
};

enum class ActionKind { deposit_premium, escrow_principal, present_hashkey, trade, bid };

struct Action {
    ActionKind kind = ActionKind::deposit_premium;
    PartyId party;
    std::string chain;
    std::string contract;
    int slot = -1;
    Amount amount = 0;
    int leg = -1;
    std::optional<Hashkey> key;
    int submit_index = 0;  // assigned by World::submit
};

// Run options: seeded fault injection for the negative-control tests, plus
// the intra-tick ordering permutation used to explore adversarial reordering.
// All off by default; runs stay deterministic for any fixed setting.
struct FaultFlags {
    bool disable_premium_activation = false;
    bool disable_challenge_forwarding = false;
    std::uint64_t order_permutation_seed = 0;  // 0 = canonical party order
};

class World;

class Contract {
public:
    Contract(std::string id, std::string chain)
        : id_(std::move(id)), chain_(std::move(chain)) {}
    virtual ~Contract() = default;

    const std::string& id() const { return id_; }
    const std::string& chain() const { return chain_; }

    // Timeout-triggered refunds/awards, run before any same-tick action.
    virtual void process_timeouts(World& w, Tick t) = 0;
    // Returns false when the action is rejected (caller records the event).
    virtual bool apply(World& w, const Action& a, Tick t, std::string& reject_reason) = 0;
    virtual Amount held_premium() const = 0;
    virtual bool quiescent() const = 0;

protected:
    std::string id_;
    std::string chain_;
};

// Deterministic logical-time simulation of independent chains. One tick is
// one Delta period unless ticks_per_delta says otherwise. Per tick:
// begin_tick() runs timeout processing, parties submit, apply_actions()
// applies submissions in (chain, party, submit index) order stamped with the
// current tick, end_tick() audits conservation and advances the clock.
class World {
public:
    World(CryptoSuite& suite, int ticks_per_delta = 1, FaultFlags faults = {});

    CryptoSuite& suite() { return *suite_; }
    const CryptoSuite& suite() const { return *suite_; }
    int ticks_per_delta() const { return tpd_; }
    Tick delta(Tick n) const { return n * tpd_; }  // n Delta periods in ticks
    const FaultFlags& faults() const { return faults_; }
    Tick now() const { return now_; }

    void add_chain(const std::string& name);
    bool has_chain(const std::string& name) const;
    void fund(const std::string& chain, const PartyId& party, Amount amount);
    Amount balance(const std::string& chain, const PartyId& party) const;

    template <typename T, typename... Args>
    T& add_contract(Args&&... args) {
        auto c = std::make_unique<T>(std::forward<Args>(args)...);
        T& ref = *c;
        register_contract(std::move(c));
        return ref;
    }
    Contract* find_contract(const std::string& id);
    const Contract* find_contract(const std::string& id) const;

    void submit(Action a);
    void begin_tick();
    void apply_actions();
    void end_tick();
    void run_to(Tick end);  // ticks with no party activity

    // Ledger views. Events on a chain become visible to others one Delta
    // after emission; a party sees its own events immediately.
    bool visible_to(const Event& e, const PartyId& viewer, Tick t) const;
    std::vector<const Event*> visible_events(const PartyId& viewer,
                                             const std::string& chain, Tick t) const;

    const std::vector<Event>& events() const { return events_; }
    void emit(Event e);  // stamped with now()

    // Party -> contract balance moves, premium conservation stays chain-local.
    void pay_in(const std::string& chain, const PartyId& from, Amount amt);
    void pay_out(const std::string& chain, const PartyId& to, Amount amt);

    void audit_conservation() const;  // throws std::logic_error on violation
    bool all_quiescent() const;
    std::uint64_t trace_hash() const;

private:
    void register_contract(std::unique_ptr<Contract> c);

    CryptoSuite* suite_;
    int tpd_;
    FaultFlags faults_;
    Tick now_ = 0;
    std::map<std::string, std::map<PartyId, Amount>> balances_;
    std::map<std::string, Amount> initial_pool_;  // per-chain conservation base
    std::vector<std::unique_ptr<Contract>> contracts_;
    std::map<std::string, Contract*> by_id_;
    std::vector<Event> events_;
    std::vector<Action> pending_;
    std::map<PartyId, int> submit_seq_;
};

std::string event_record(const Event& e);  // one-line machine record

}  // namespace hedgesim
