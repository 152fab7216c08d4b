#include "hedgesim/contracts.hpp"

#include <algorithm>
#include <sstream>

namespace hedgesim {

const char* to_string(SlotState s) {
    switch (s) {
        case SlotState::empty: return "empty";
        case SlotState::deposited: return "deposited";
        case SlotState::active: return "active";
        case SlotState::refunded: return "refunded";
        case SlotState::awarded: return "awarded";
    }
    return "?";
}

const char* to_string(SlotCategory c) {
    switch (c) {
        case SlotCategory::swap: return "swap";
        case SlotCategory::escrow: return "escrow";
        case SlotCategory::redemption: return "redemption";
        case SlotCategory::trading: return "trading";
        case SlotCategory::bootstrap: return "bootstrap";
    }
    return "?";
}

std::string EscrowContract::state_name() const {
    if (redeemed) return "redeemed";
    if (refunded) return "refunded";
    if (escrowed) return "principal-escrowed";
    return "published";
}

void EscrowContract::publish(World& w) {
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::publish;
    e.party = escrow_party;
    std::ostringstream os;
    os << "escrow-deadline=" << escrow_deadline << " redeem-deadline=" << redeem_deadline
       << " hashlocks=" << hashlocks.size() << " slots=" << slots.size()
       << " expiry-anchor=" << expiry_anchor;
    e.detail = os.str();
    w.emit(std::move(e));
}

bool EscrowContract::cond_true(const Cond& c) const {
    switch (c.kind) {
        case CondKind::never: return false;
        case CondKind::principal_escrowed: return escrowed;
        case CondKind::principal_redeemed: return redeemed;
        case CondKind::hashlock_unlocked: return hashlock_unlocked(c.index);
        case CondKind::slot_deposited:
            return c.index >= 0 && c.index < int(slots.size()) &&
                   slots[c.index].deposited_at >= 0;
        case CondKind::leg_committed:
            return c.index >= 0 && c.index < int(legs.size()) && legs[c.index].committed;
    }
    return false;
}

bool EscrowContract::activation_ready(const PremiumSlot&) const {
    // activated once the contract has received redemption premiums for every
    // hashkey it expects (the slots laid out at publication); a brokered
    // contract's legs activate together, which keeps each trading premium
    // covered by the escrow premium that passes through to it
    for (const auto& r : slots) {
        if (r.category != SlotCategory::redemption) continue;
        if (r.deposited_at < 0) return false;
    }
    return true;
}

void EscrowContract::refund_slot(World& w, PremiumSlot& s, int idx, const char* why) {
    s.state = SlotState::refunded;
    w.pay_out(chain_, s.depositor, s.amount);
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::premium_refund;
    e.party = s.depositor;
    e.amount = s.amount;
    e.slot = idx;
    e.hashlock = s.hashlock;
    e.detail = why;
    w.emit(std::move(e));
}

void EscrowContract::award_slot(World& w, PremiumSlot& s, int idx) {
    s.state = SlotState::awarded;
    w.pay_out(chain_, s.beneficiary, s.amount);
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::award_premium;
    e.party = s.depositor;
    e.counterparty = s.beneficiary;
    e.amount = s.amount;
    e.slot = idx;
    e.hashlock = s.hashlock;
    e.detail = s.label;
    w.emit(std::move(e));
}

void EscrowContract::prompt_checks(World& w, Tick t) {
    for (size_t i = 0; i < slots.size(); ++i) {
        auto& s = slots[i];
        if (s.state == SlotState::deposited && s.needs_activation && activation_ready(s)) {
            s.state = SlotState::active;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::activate_premium;
            e.party = s.depositor;
            e.slot = int(i);
            e.detail = s.label;
            w.emit(std::move(e));
        }
        if ((s.state == SlotState::deposited || s.state == SlotState::active) &&
            cond_true(s.success)) {
            refund_slot(w, s, int(i), "satisfied");
        }
    }
    try_redeem(w, t);
}

void EscrowContract::try_redeem(World& w, Tick t) {
    if (!escrowed || redeemed || refunded) return;
    if (t >= redeem_deadline) return;
    for (size_t i = 0; i < hashlocks.size(); ++i)
        if (!hashlock_unlocked(int(i))) return;
    for (const auto& l : legs)
        if (!l.committed) return;
    redeemed = true;
    for (const auto& lot : lots) {
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::redeem;
        e.party = lot.owner;
        e.counterparty = lot.recipient;
        e.amount = lot.value;
        e.detail = lot.asset;
        w.emit(std::move(e));
    }
    // redemption-conditioned premiums come back immediately
    for (size_t i = 0; i < slots.size(); ++i) {
        auto& s = slots[i];
        if ((s.state == SlotState::deposited || s.state == SlotState::active) &&
            cond_true(s.success))
            refund_slot(w, s, int(i), "satisfied");
    }
}

void EscrowContract::process_timeouts(World& w, Tick t) {
    // principal first, then premium slots in index order
    if (escrowed && !redeemed && !refunded && t >= redeem_deadline) {
        refunded = true;
        for (const auto& lot : lots) {
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::refund;
            e.party = lot.owner;
            e.amount = lot.value;
            e.detail = lot.asset;
            w.emit(std::move(e));
        }
    }
    for (size_t i = 0; i < slots.size(); ++i) {
        auto& s = slots[i];
        if (s.state != SlotState::deposited && s.state != SlotState::active) continue;
        if (s.state == SlotState::deposited && s.needs_activation && activation_ready(s)) {
            s.state = SlotState::active;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::activate_premium;
            e.party = s.depositor;
            e.slot = int(i);
            e.detail = s.label;
            w.emit(std::move(e));
        }
        if (cond_true(s.success)) {
            refund_slot(w, s, int(i), "satisfied");
            continue;
        }
        if (s.guard && t >= s.guard_deadline && !cond_true(*s.guard)) {
            refund_slot(w, s, int(i), "guard");
            continue;
        }
        if (t >= s.forfeit_deadline) {
            bool effective_active = s.state == SlotState::active || !s.needs_activation ||
                                    w.faults().disable_premium_activation;
            if (effective_active)
                award_slot(w, s, int(i));
            else
                refund_slot(w, s, int(i), "inactive");
        }
    }
}

bool EscrowContract::apply(World& w, const Action& a, Tick t, std::string& reason) {
    switch (a.kind) {
        case ActionKind::deposit_premium: {
            if (a.slot < 0 || a.slot >= int(slots.size())) { reason = "no-such-slot"; return false; }
            auto& s = slots[a.slot];
            if (s.state != SlotState::empty) { reason = "slot-not-empty"; return false; }
            if (a.party != s.depositor) { reason = "wrong-depositor"; return false; }
            if (a.amount != s.amount) { reason = "wrong-amount"; return false; }
            if (t >= s.deposit_deadline) { reason = "late"; return false; }
            w.pay_in(chain_, a.party, s.amount);
            s.state = SlotState::deposited;
            s.deposited_at = t;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::deposit_premium;
            e.party = a.party;
            e.amount = s.amount;
            e.slot = a.slot;
            e.hashlock = s.hashlock;
            e.path = s.path;
            e.detail = s.label;
            w.emit(std::move(e));
            prompt_checks(w, t);
            return true;
        }
        case ActionKind::escrow_principal: {
            if (a.party != escrow_party) { reason = "wrong-party"; return false; }
            if (escrowed) { reason = "already-escrowed"; return false; }
            if (t >= escrow_deadline) { reason = "late"; return false; }
            escrowed = true;
            for (auto& l : legs)
                if (l.escrow_leg) l.committed = true;
            Amount total = 0;
            for (const auto& lot : lots) total += lot.value;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::escrow_principal;
            e.party = a.party;
            e.amount = total;
            w.emit(std::move(e));
            prompt_checks(w, t);
            return true;
        }
        case ActionKind::present_hashkey: {
            if (!a.key) { reason = "missing-key"; return false; }
            const Hashkey& k = *a.key;
            Digest32 digest = w.suite().hash(k.secret.bytes);
            int idx = -1;
            for (size_t i = 0; i < hashlocks.size(); ++i)
                if (hashlocks[i] == digest) { idx = int(i); break; }
            if (idx < 0) { reason = "hashlock-mismatch"; return false; }
            if (hashlock_unlocked(idx)) { reason = "already-unlocked"; return false; }
            if (!valid_heads.empty() && !k.path.empty() && !valid_heads.count(k.path.front())) {
                reason = "bad-path";
                return false;
            }
            auto v = validate_hashkey(w.suite(), k, hashlocks[idx], *graph, t,
                                      expiry_rule, expiry_anchor, w.ticks_per_delta());
            if (!v.valid) { reason = to_string(v.reason); return false; }
            received[idx] = k;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::reveal_hashkey;
            e.party = a.party;
            e.hashlock = idx;
            e.path = k.path;
            e.key = k;
            w.emit(std::move(e));
            prompt_checks(w, t);
            return true;
        }
        case ActionKind::trade: {
            if (a.leg < 0 || a.leg >= int(legs.size())) { reason = "no-such-leg"; return false; }
            auto& l = legs[a.leg];
            if (l.escrow_leg) { reason = "escrow-leg"; return false; }
            if (l.committed) { reason = "already-committed"; return false; }
            if (a.party != l.committer) { reason = "wrong-party"; return false; }
            if (t >= l.commit_deadline) { reason = "late"; return false; }
            // intermediate trades need the goods: earlier legs must be in
            for (int i = 0; i < a.leg; ++i)
                if (!legs[i].committed) { reason = "missing-upstream-leg"; return false; }
            l.committed = true;
            Event e;
            e.chain = chain_;
            e.contract = id_;
            e.kind = EventKind::trade;
            e.party = a.party;
            e.counterparty = l.to;
            e.slot = a.leg;
            w.emit(std::move(e));
            prompt_checks(w, t);
            return true;
        }
        case ActionKind::bid:
            reason = "not-an-auction";
            return false;
    }
    reason = "bad-action";
    return false;
}

Amount EscrowContract::held_premium() const {
    Amount held = 0;
    for (const auto& s : slots)
        if (s.state == SlotState::deposited || s.state == SlotState::active)
            held += s.amount;
    return held;
}

bool EscrowContract::quiescent() const {
    if (escrowed && !redeemed && !refunded) return false;
    for (const auto& s : slots)
        if (s.state == SlotState::deposited || s.state == SlotState::active) return false;
    return true;
}

// ---------------------------------------------------------------------------

void AuctionCoinContract::publish(World& w, const PartyId& endower) {
    endowment_held = endowment_per_bidder * Amount(bidders.size());
    w.pay_in(chain_, endower, endowment_held);
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::endow;
    e.party = endower;
    e.amount = endowment_held;
    std::ostringstream os;
    os << "bid-deadline=" << bid_deadline << " challenge-end=" << challenge_end
       << " commit=" << commit_tick;
    e.detail = os.str();
    w.emit(std::move(e));
}

std::optional<PartyId> AuctionCoinContract::highest_bidder() const {
    std::optional<PartyId> best;
    Amount best_amt = 0;
    for (const auto& b : bidders) {  // declared order breaks ties
        auto it = bids.find(b);
        if (it == bids.end()) continue;
        if (!best || it->second > best_amt) {
            best = b;
            best_amt = it->second;
        }
    }
    return best;
}

bool AuctionCoinContract::apply(World& w, const Action& a, Tick t, std::string& reason) {
    if (a.kind == ActionKind::bid) {
        if (t >= bid_deadline) { reason = "late"; return false; }  // no new bids after the phase
        if (std::find(bidders.begin(), bidders.end(), a.party) == bidders.end()) {
            reason = "unknown-bidder";
            return false;
        }
        if (bids.count(a.party)) { reason = "already-bid"; return false; }
        if (a.amount <= 0) { reason = "bad-amount"; return false; }
        w.pay_in(chain_, a.party, a.amount);
        bids[a.party] = a.amount;
        bids_held_ += a.amount;
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::bid;
        e.party = a.party;
        e.amount = a.amount;
        w.emit(std::move(e));
        return true;
    }
    if (a.kind == ActionKind::present_hashkey) {
        if (!a.key) { reason = "missing-key"; return false; }
        if (settled || t >= challenge_end) { reason = "late"; return false; }
        Digest32 digest = w.suite().hash(a.key->secret.bytes);
        int idx = -1;
        for (size_t i = 0; i < hashlocks.size(); ++i)
            if (hashlocks[i] == digest) { idx = int(i); break; }
        if (idx < 0) { reason = "hashlock-mismatch"; return false; }
        if (received.count(idx)) { reason = "already-unlocked"; return false; }
        auto v = validate_hashkey(w.suite(), *a.key, hashlocks[idx], *graph, t,
                                  ExpiryRule::auction, expiry_anchor,
                                  w.ticks_per_delta());
        if (!v.valid) { reason = to_string(v.reason); return false; }
        received[idx] = *a.key;
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::reveal_hashkey;
        e.party = a.party;
        e.hashlock = idx;
        e.path = a.key->path;
        e.key = *a.key;
        w.emit(std::move(e));
        return true;
    }
    reason = "bad-action";
    return false;
}

void AuctionCoinContract::process_timeouts(World& w, Tick t) {
    if (settled || t < commit_tick) return;
    settled = true;
    auto refund_bid = [&](const PartyId& b, Amount extra) {
        auto it = bids.find(b);
        if (it == bids.end()) return;
        w.pay_out(chain_, b, it->second + extra);
        bids_held_ -= it->second;
        endowment_held -= extra;
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::refund;
        e.party = b;
        e.amount = it->second;
        e.detail = "bid";
        w.emit(std::move(e));
        if (extra > 0) {
            Event a;
            a.chain = chain_;
            a.contract = id_;
            a.kind = EventKind::award_premium;
            a.party = auctioneer;
            a.counterparty = b;
            a.amount = extra;
            a.detail = "endowment";
            w.emit(std::move(a));
        }
    };

    auto winner = highest_bidder();
    bool winner_only = winner && received.size() == 1 &&
                       bidders[received.begin()->first] == *winner;
    Event s;
    s.chain = chain_;
    s.contract = id_;
    s.kind = EventKind::settle;
    s.party = auctioneer;
    if (winner_only) {
        s.detail = "complete";
        w.emit(std::move(s));
        for (const auto& b : bidders)
            if (b != *winner) refund_bid(b, 0);
        Amount wb = bids[*winner];
        w.pay_out(chain_, auctioneer, wb);
        bids_held_ -= wb;
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::redeem;
        e.party = *winner;
        e.counterparty = auctioneer;
        e.amount = wb;
        e.detail = "winning-bid";
        w.emit(std::move(e));
        w.pay_out(chain_, auctioneer, endowment_held);
        Event r;
        r.chain = chain_;
        r.contract = id_;
        r.kind = EventKind::premium_refund;
        r.party = auctioneer;
        r.amount = endowment_held;
        r.detail = "endowment";
        endowment_held = 0;
        w.emit(std::move(r));
    } else {
        // low bidder's hashkey, no hashkey, or both: the auctioneer cheated
        s.detail = "refund-all";
        w.emit(std::move(s));
        for (const auto& b : bidders) refund_bid(b, bids.count(b) ? endowment_per_bidder : 0);
        if (endowment_held > 0) {
            w.pay_out(chain_, auctioneer, endowment_held);
            Event r;
            r.chain = chain_;
            r.contract = id_;
            r.kind = EventKind::premium_refund;
            r.party = auctioneer;
            r.amount = endowment_held;
            r.detail = "endowment";
            endowment_held = 0;
            w.emit(std::move(r));
        }
    }
}

Amount AuctionCoinContract::held_premium() const { return endowment_held + bids_held_; }

// ---------------------------------------------------------------------------

void AuctionTicketContract::publish(World& w) {
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::escrow_principal;
    e.party = auctioneer;
    e.amount = tickets.value;
    e.detail = tickets.asset;
    w.emit(std::move(e));
}

bool AuctionTicketContract::apply(World& w, const Action& a, Tick t, std::string& reason) {
    if (a.kind != ActionKind::present_hashkey) { reason = "bad-action"; return false; }
    if (!a.key) { reason = "missing-key"; return false; }
    if (settled || t >= challenge_end) { reason = "late"; return false; }
    Digest32 digest = w.suite().hash(a.key->secret.bytes);
    int idx = -1;
    for (size_t i = 0; i < hashlocks.size(); ++i)
        if (hashlocks[i] == digest) { idx = int(i); break; }
    if (idx < 0) { reason = "hashlock-mismatch"; return false; }
    if (received.count(idx)) { reason = "already-unlocked"; return false; }
    auto v = validate_hashkey(w.suite(), *a.key, hashlocks[idx], *graph, t,
                              ExpiryRule::auction, expiry_anchor, w.ticks_per_delta());
    if (!v.valid) { reason = to_string(v.reason); return false; }
    received[idx] = *a.key;
    Event e;
    e.chain = chain_;
    e.contract = id_;
    e.kind = EventKind::reveal_hashkey;
    e.party = a.party;
    e.hashlock = idx;
    e.path = a.key->path;
    e.key = *a.key;
    w.emit(std::move(e));
    return true;
}

void AuctionTicketContract::process_timeouts(World& w, Tick t) {
    if (settled || t < commit_tick) return;
    settled = true;
    Event s;
    s.chain = chain_;
    s.contract = id_;
    s.kind = EventKind::settle;
    s.party = auctioneer;
    // exactly one distinct hashkey: transfer to the matching party;
    // zero or two: refund to the auctioneer
    if (received.size() == 1) {
        const PartyId& to = bidders[received.begin()->first];
        s.detail = "transfer";
        w.emit(std::move(s));
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::redeem;
        e.party = auctioneer;
        e.counterparty = to;
        e.amount = tickets.value;
        e.detail = tickets.asset;
        w.emit(std::move(e));
    } else {
        s.detail = "refund";
        w.emit(std::move(s));
        Event e;
        e.chain = chain_;
        e.contract = id_;
        e.kind = EventKind::refund;
        e.party = auctioneer;
        e.amount = tickets.value;
        e.detail = tickets.asset;
        w.emit(std::move(e));
    }
}

}  // namespace hedgesim
