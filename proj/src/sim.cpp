#include "hedgesim/sim.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hedgesim {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::publish: return "publish";
        case EventKind::deposit_premium: return "deposit-premium";
        case EventKind::activate_premium: return "activate-premium";
        case EventKind::escrow_principal: return "escrow-principal";
        case EventKind::reveal_hashkey: return "reveal-hashkey";
        case EventKind::redeem: return "redeem";
        case EventKind::refund: return "refund";
        case EventKind::premium_refund: return "refund-premium";
        case EventKind::award_premium: return "award-premium";
        case EventKind::trade: return "trade";
        case EventKind::bid: return "bid";
        case EventKind::endow: return "endow";
        case EventKind::settle: return "settle";
        case EventKind::reject: return "reject";
    }
    return "?";
}

World::World(CryptoSuite& suite, int ticks_per_delta, FaultFlags faults)
    : suite_(&suite), tpd_(ticks_per_delta), faults_(faults) {
    if (tpd_ < 1) throw std::invalid_argument("ticks_per_delta must be >= 1");
}

void World::add_chain(const std::string& name) {
    balances_[name];
    initial_pool_[name];
}

bool World::has_chain(const std::string& name) const {
    return balances_.count(name) > 0;
}

void World::fund(const std::string& chain, const PartyId& party, Amount amount) {
    if (!has_chain(chain)) throw std::invalid_argument("unknown chain: " + chain);
    balances_[chain][party] += amount;
    initial_pool_[chain] += amount;
}

Amount World::balance(const std::string& chain, const PartyId& party) const {
    auto it = balances_.find(chain);
    if (it == balances_.end()) throw std::invalid_argument("unknown chain: " + chain);
    auto jt = it->second.find(party);
    return jt == it->second.end() ? 0 : jt->second;
}

void World::register_contract(std::unique_ptr<Contract> c) {
    if (!has_chain(c->chain()))
        throw std::invalid_argument("contract on unknown chain: " + c->chain());
    if (by_id_.count(c->id()))
        throw std::invalid_argument("duplicate contract id: " + c->id());
    by_id_[c->id()] = c.get();
    contracts_.push_back(std::move(c));
}

Contract* World::find_contract(const std::string& id) {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

const Contract* World::find_contract(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

void World::submit(Action a) {
    a.submit_index = submit_seq_[a.party]++;
    pending_.push_back(std::move(a));
}

void World::begin_tick() {
    // a contract only ever reads and writes its own chain's state here
    for (auto& c : contracts_) c->process_timeouts(*this, now_);
}

void World::apply_actions() {
    // canonical order is (chain, party, submission index); a permutation seed
    // reshuffles the party rank per tick to explore adversarial reordering
    auto party_rank = [&](const PartyId& p) -> std::uint64_t {
        if (faults_.order_permutation_seed == 0) return 0;
        std::uint64_t h = faults_.order_permutation_seed ^ std::uint64_t(now_) * 0x9e3779b9ULL;
        for (char c : p) h = (h ^ std::uint8_t(c)) * 0x100000001b3ULL;
        h ^= h >> 33;
        return h;
    };
    std::stable_sort(pending_.begin(), pending_.end(),
                     [&](const Action& a, const Action& b) {
                         return std::make_tuple(a.chain, party_rank(a.party), a.party,
                                                a.submit_index) <
                                std::make_tuple(b.chain, party_rank(b.party), b.party,
                                                b.submit_index);
                     });
    for (const Action& a : pending_) {
        Contract* c = find_contract(a.contract);
        std::string reason;
        if (!c) {
            reason = "unknown-contract";
        } else if (c->chain() != a.chain) {
            reason = "wrong-chain";
        } else if (!c->apply(*this, a, now_, reason) && reason.empty()) {
            reason = "rejected";
        }
        if (!reason.empty()) {
            Event e;
            e.chain = a.chain;
            e.contract = a.contract;
            e.kind = EventKind::reject;
            e.party = a.party;
            e.detail = reason;
            // rejected input is not committed: no payload published
            emit(std::move(e));
        }
    }
    pending_.clear();
}

void World::end_tick() {
    audit_conservation();
    ++now_;
    submit_seq_.clear();
}

void World::run_to(Tick end) {
    while (now_ < end) {
        begin_tick();
        apply_actions();
        end_tick();
    }
}

void World::emit(Event e) {
    e.tick = now_;
    events_.push_back(std::move(e));
}

bool World::visible_to(const Event& e, const PartyId& viewer, Tick t) const {
    if (e.tick + tpd_ <= t) return true;
    return e.party == viewer && e.tick <= t;
}

std::vector<const Event*> World::visible_events(const PartyId& viewer,
                                                const std::string& chain,
                                                Tick t) const {
    if (!has_chain(chain)) throw std::invalid_argument("unknown chain: " + chain);
    std::vector<const Event*> out;
    for (const auto& e : events_)
        if (e.chain == chain && visible_to(e, viewer, t)) out.push_back(&e);
    return out;
}

void World::pay_in(const std::string& chain, const PartyId& from, Amount amt) {
    auto& bal = balances_.at(chain)[from];
    if (bal < amt) throw std::logic_error("insufficient balance: " + from + " on " + chain);
    bal -= amt;
}

void World::pay_out(const std::string& chain, const PartyId& to, Amount amt) {
    balances_.at(chain)[to] += amt;
}

void World::audit_conservation() const {
    for (const auto& [chain, bals] : balances_) {
        Amount total = 0;
        for (const auto& [_, b] : bals) total += b;
        for (const auto& c : contracts_)
            if (c->chain() == chain) total += c->held_premium();
        if (total != initial_pool_.at(chain))
            throw std::logic_error("conservation violated on chain " + chain);
    }
}

bool World::all_quiescent() const {
    for (const auto& c : contracts_)
        if (!c->quiescent()) return false;
    return true;
}

std::string event_record(const Event& e) {
    std::ostringstream os;
    os << "{\"tick\":" << e.tick << ",\"chain\":\"" << e.chain << "\",\"contract\":\""
       << e.contract << "\",\"kind\":\"" << to_string(e.kind) << "\",\"party\":\""
       << e.party << "\"";
    if (!e.counterparty.empty()) os << ",\"counterparty\":\"" << e.counterparty << "\"";
    if (e.amount != 0) os << ",\"amount\":" << e.amount;
    if (e.slot >= 0) os << ",\"slot\":" << e.slot;
    if (e.hashlock >= 0) os << ",\"hashlock\":" << e.hashlock;
    if (!e.path.empty()) {
        os << ",\"path\":[";
        for (size_t i = 0; i < e.path.size(); ++i)
            os << (i ? "," : "") << "\"" << e.path[i] << "\"";
        os << "]";
    }
    if (!e.detail.empty()) os << ",\"detail\":\"" << e.detail << "\"";
    os << "}";
    return os.str();
}

std::uint64_t World::trace_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : events_) {
        std::string line = event_record(e);
        for (unsigned char c : line) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace hedgesim
