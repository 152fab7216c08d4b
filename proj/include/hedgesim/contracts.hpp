#pragma once

#include <memory>
#include <optional>
#include <set>

#include "hedgesim/graph.hpp"
#include "hedgesim/sim.hpp"

namespace hedgesim {

enum class SlotState { empty, deposited, active, refunded, awarded };
const char* to_string(SlotState s);

enum class SlotCategory { swap, escrow, redemption, trading, bootstrap };
const char* to_string(SlotCategory c);

enum class CondKind {
    never,
    principal_escrowed,
    principal_redeemed,
    hashlock_unlocked,  // index = hashlock
    slot_deposited,     // index = slot
    leg_committed,      // index = leg
};

struct Cond {
    CondKind kind = CondKind::never;
    int index = -1;
};

// One premium slot. Lifecycle: empty -> deposited -> (active) -> refunded |
// awarded. Refund happens when `success` comes true, when the guard finds its
// prerequisite missing at guard_deadline, or when the slot reaches
// forfeit_deadline without ever activating. An active (or activation-free)
// slot whose success never came true is awarded at forfeit_deadline.
struct PremiumSlot {
    std::string label;
    SlotCategory category = SlotCategory::swap;
    PartyId depositor;
    PartyId beneficiary;
    Amount amount = 0;
    Tick deposit_deadline = 0;
    bool needs_activation = false;
    int leg = 0;  // activation scope: redemption slots of the same leg
    int hashlock = -1;
    std::vector<PartyId> path;
    Cond success;
    std::optional<Cond> guard;
    Tick guard_deadline = -1;
    Tick forfeit_deadline = 0;

    SlotState state = SlotState::empty;
    Tick deposited_at = -1;
};

struct Leg {
    PartyId from;
    PartyId to;
    bool escrow_leg = false;  // committed by the principal escrow itself
    PartyId committer;        // who must commit this leg (trade action)
    Tick commit_deadline = 0;
    bool committed = false;
};

struct AssetLot {
    std::string asset;
    Amount value = 0;
    PartyId owner;
    PartyId recipient;
};

// Escrow contract: principal lots with a hashlock vector and timelocks,
// premium slots with activation, trade legs for brokered flows. All
// decisions are local to this contract's chain.
class EscrowContract : public Contract {
public:
    EscrowContract(std::string id, std::string chain) : Contract(id, chain) {}

    std::vector<Leg> legs;
    std::vector<AssetLot> lots;
    PartyId escrow_party;
    Tick escrow_deadline = 0;
    Tick redeem_deadline = 0;
    std::vector<Digest32> hashlocks;
    std::shared_ptr<const SwapDigraph> graph;
    ExpiryRule expiry_rule = ExpiryRule::swap;
    Tick expiry_anchor = 0;
    std::set<PartyId> valid_heads;  // allowed path starts; empty = any
    std::vector<PremiumSlot> slots;

    bool escrowed = false;
    bool redeemed = false;
    bool refunded = false;
    std::map<int, Hashkey> received;  // hashlock index -> first valid key

    void publish(World& w);  // emits the publish event with schedule detail
    void process_timeouts(World& w, Tick t) override;
    bool apply(World& w, const Action& a, Tick t, std::string& reason) override;
    Amount held_premium() const override;
    bool quiescent() const override;

    bool hashlock_unlocked(int index) const { return received.count(index) > 0; }
    std::string state_name() const;

private:
    bool cond_true(const Cond& c) const;
    bool activation_ready(const PremiumSlot& s) const;
    void prompt_checks(World& w, Tick t);
    void try_redeem(World& w, Tick t);
    void refund_slot(World& w, PremiumSlot& s, int idx, const char* why);
    void award_slot(World& w, PremiumSlot& s, int idx);
};

// Auction coin-chain contract: records bids during the bidding phase, then
// hashkeys, then settles at the commit tick against the decision table.
class AuctionCoinContract : public Contract {
public:
    AuctionCoinContract(std::string id, std::string chain) : Contract(id, chain) {}

    PartyId auctioneer;
    std::vector<PartyId> bidders;       // aligned with hashlocks
    std::vector<Digest32> hashlocks;    // hashlocks[i] identifies bidders[i]
    Amount endowment_per_bidder = 0;    // p
    Tick bid_deadline = 0;
    Tick challenge_end = 0;
    Tick commit_tick = 0;
    std::shared_ptr<const SwapDigraph> graph;
    Tick expiry_anchor = 0;

    std::map<PartyId, Amount> bids;
    std::map<int, Hashkey> received;
    Amount endowment_held = 0;
    bool settled = false;

    void publish(World& w, const PartyId& endower);  // takes the n*p endowment
    void process_timeouts(World& w, Tick t) override;
    bool apply(World& w, const Action& a, Tick t, std::string& reason) override;
    Amount held_premium() const override;
    bool quiescent() const override { return settled; }

    std::optional<PartyId> highest_bidder() const;

private:
    Amount bids_held_ = 0;
};

// Auction ticket-chain contract: holds the tickets, records hashkeys,
// transfers on exactly one distinct hashkey at commit, else refunds.
class AuctionTicketContract : public Contract {
public:
    AuctionTicketContract(std::string id, std::string chain) : Contract(id, chain) {}

    PartyId auctioneer;
    std::vector<PartyId> bidders;
    std::vector<Digest32> hashlocks;
    AssetLot tickets;
    Tick challenge_end = 0;
    Tick commit_tick = 0;
    std::shared_ptr<const SwapDigraph> graph;
    Tick expiry_anchor = 0;

    std::map<int, Hashkey> received;
    bool settled = false;

    void publish(World& w);
    void process_timeouts(World& w, Tick t) override;
    bool apply(World& w, const Action& a, Tick t, std::string& reason) override;
    Amount held_premium() const override { return 0; }
    bool quiescent() const override { return settled; }
};

}  // namespace hedgesim
