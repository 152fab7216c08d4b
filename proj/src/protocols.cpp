#include "hedgesim/protocols.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "hedgesim/premiums.hpp"

namespace hedgesim {

const char* to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::two_party_base: return "two-party-base";
        case ProtocolKind::two_party_hedged: return "two-party-hedged";
        case ProtocolKind::bootstrap: return "bootstrap";
        case ProtocolKind::multi_party: return "multi-party";
        case ProtocolKind::broker: return "broker";
        case ProtocolKind::auction: return "auction";
    }
    return "?";
}

std::string StrategyProfile::describe(const std::vector<Obligation>& obls) const {
    if (all_compliant()) return "all-compliant";
    std::ostringstream os;
    bool first = true;
    for (const auto& [party, dirs] : directives) {
        for (const auto& d : dirs) {
            if (!first) os << " ";
            first = false;
            const Obligation* o = nullptr;
            for (const auto& ob : obls)
                if (ob.id == d.obligation_id) { o = &ob; break; }
            os << party << ":";
            switch (d.kind) {
                case DirectiveKind::omit: os << "omit"; break;
                case DirectiveKind::delay: os << "delay+" << d.delay; break;
                case DirectiveKind::wrong_key: os << "wrong-key"; break;
                case DirectiveKind::one_sided: os << "one-sided(" << d.chain << ")"; break;
                case DirectiveKind::wrong_key_one_sided:
                    os << "wrong-key-one-sided(" << d.chain << ")";
                    break;
                case DirectiveKind::withhold_arcs: {
                    os << "withhold(";
                    for (size_t i = 0; i < d.arcs.size(); ++i)
                        os << (i ? "," : "") << d.arcs[i].first << "->" << d.arcs[i].second;
                    os << ")";
                    break;
                }
            }
            os << "@" << (o ? o->cls : std::to_string(d.obligation_id));
        }
    }
    return os.str();
}

namespace {

// ---- view of a contract through a party's Delta-delayed ledger ------------

struct ContractViewState {
    bool escrowed = false;
    bool redeemed = false;
    bool refunded = false;
    std::set<int> slots_deposited;
    std::set<int> slots_active;
    std::map<int, Hashkey> keys;  // hashlock -> first observed key
    std::set<int> legs_committed;
    std::map<PartyId, Amount> bids;
};

ContractViewState view_contract(const World& w, const PartyId& viewer,
                                const std::string& chain,
                                const std::string& contract, Tick t) {
    ContractViewState v;
    for (const Event* e : w.visible_events(viewer, chain, t)) {
        if (e->contract != contract) continue;
        switch (e->kind) {
            case EventKind::escrow_principal: v.escrowed = true; break;
            case EventKind::redeem: v.redeemed = true; break;
            case EventKind::refund:
                if (e->detail != "bid") v.refunded = true;
                break;
            case EventKind::deposit_premium: v.slots_deposited.insert(e->slot); break;
            case EventKind::activate_premium: v.slots_active.insert(e->slot); break;
            case EventKind::reveal_hashkey:
                if (e->key) v.keys.emplace(e->hashlock, *e->key);
                break;
            case EventKind::trade: v.legs_committed.insert(e->slot); break;
            case EventKind::bid: v.bids[e->party] = e->amount; break;
            default: break;
        }
    }
    return v;
}

// ---- deviation plumbing ---------------------------------------------------

class Conduct {
public:
    Conduct(const std::vector<Obligation>& obls, const StrategyProfile& profile) {
        for (const auto& [party, dirs] : profile.directives) {
            for (const auto& d : dirs) {
                const Obligation* o = nullptr;
                for (const auto& ob : obls)
                    if (ob.id == d.obligation_id) { o = &ob; break; }
                if (!o) throw std::invalid_argument("directive targets unknown obligation");
                if (o->party != party)
                    throw std::invalid_argument("directive targets another party's obligation");
                by_id_[d.obligation_id] = d;
            }
        }
    }
    const Directive* get(int id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &it->second;
    }
    bool withheld(int id, const PartyId& from, const PartyId& to) const {
        const Directive* d = get(id);
        if (!d || d->kind != DirectiveKind::withhold_arcs) return false;
        for (const auto& a : d->arcs)
            if (a.first == from && a.second == to) return true;
        return false;
    }

private:
    std::map<int, Directive> by_id_;
};

class ActionPlan {
public:
    // Applies omit/delay directives; other directive kinds are interpreted by
    // the drivers themselves before calling emit. Returns false when the
    // action was omitted, so callers can keep their own-progress flags honest.
    bool emit(World& w, const Conduct& c, int obl_id, Action a) {
        const Directive* d = c.get(obl_id);
        if (d && d->kind == DirectiveKind::omit) return false;
        if (d && d->kind == DirectiveKind::delay) {
            delayed_.emplace(w.now() + d->delay, std::move(a));
            return true;
        }
        w.submit(std::move(a));
        return true;
    }
    void flush(World& w) {
        auto range = delayed_.equal_range(w.now());
        for (auto it = range.first; it != range.second; ++it) w.submit(it->second);
        delayed_.erase(range.first, range.second);
    }

private:
    std::multimap<Tick, Action> delayed_;
};

Action make_deposit(const PartyId& party, const std::string& chain,
                    const std::string& contract, int slot, Amount amount) {
    Action a;
    a.kind = ActionKind::deposit_premium;
    a.party = party;
    a.chain = chain;
    a.contract = contract;
    a.slot = slot;
    a.amount = amount;
    return a;
}

Action make_escrow(const PartyId& party, const std::string& chain,
                   const std::string& contract) {
    Action a;
    a.kind = ActionKind::escrow_principal;
    a.party = party;
    a.chain = chain;
    a.contract = contract;
    return a;
}

Action make_present(const PartyId& party, const std::string& chain,
                    const std::string& contract, Hashkey key) {
    Action a;
    a.kind = ActionKind::present_hashkey;
    a.party = party;
    a.chain = chain;
    a.contract = contract;
    a.key = std::move(key);
    return a;
}

}  // namespace

// ---- payoffs ---------------------------------------------------------------

std::map<PartyId, PartyPayoff> payoffs_from_events(const std::vector<Event>& events) {
    std::map<PartyId, PartyPayoff> pp;
    std::set<std::pair<std::string, PartyId>> refunded_contracts;
    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::redeem:
                pp[e.party].principal_delta -= e.amount;
                pp[e.counterparty].principal_delta += e.amount;
                break;
            case EventKind::refund:
                if (e.detail != "bid")
                    refunded_contracts.insert({e.contract, e.party});
                break;
            case EventKind::award_premium: {
                pp[e.party].premium_delta -= e.amount;
                pp[e.counterparty].premium_delta += e.amount;
                std::string cat = e.detail.substr(0, e.detail.find(':'));
                if (cat == "escrow" || cat == "trading") {
                    pp[e.party].escrow_trading_delta -= e.amount;
                    pp[e.counterparty].escrow_trading_delta += e.amount;
                } else if (cat == "redemption") {
                    pp[e.party].redemption_delta -= e.amount;
                    pp[e.counterparty].redemption_delta += e.amount;
                }
                break;
            }
            default: break;
        }
    }
    for (const auto& [c, p] : refunded_contracts) {
        (void)c;
        pp[p].escrowed_unredeemed += 1;
    }
    return pp;
}

RunResult ProtocolDriver::run(const StrategyProfile& profile, CryptoSuite& suite,
                              FaultFlags faults) const {
    RunResult r = run_impl(profile, suite, faults);
    for (const auto& [party, pay] : payoffs_from_events(r.events))
        r.payoffs[party] = pay;
    for (const auto& p : parties())
        r.payoffs.try_emplace(p);
    return r;
}

// ===========================================================================
// Two-party swap (base and hedged) and the bootstrapped generalization.
// The hedged schedule: premiums at Delta and 2*Delta, principals at
// t_ae=3*Delta and t_be=4*Delta, redemptions at t_A=5*Delta and t_B=6*Delta,
// every deadline exclusive. Bootstrapping prepends r premium-swap stages,
// shifting the whole ladder by 2r ticks; level-j deposits protect the
// level-(j-1) deposits below them on the same contract.
// ===========================================================================

namespace {

struct StackSpec {
    int level = 0;
    PartyId depositor;
    PartyId beneficiary;
    Amount amount = 0;
    Tick deposit_tick = 0;  // Delta units
};

class TwoPartyFamilyDriver final : public ProtocolDriver {
public:
    TwoPartyFamilyDriver(Scenario s, bool hedged, int rounds)
        : ProtocolDriver(std::move(s)), hedged_(hedged), rounds_(rounds) {
        const auto& sc = scenario_;
        graph_ = std::make_shared<SwapDigraph>();
        graph_->vertices = {sc.alice, sc.bob};
        graph_->arcs = {
            {sc.alice, sc.bob, "apricot", "apricot-asset", sc.value_a, -1},
            {sc.bob, sc.alice, "banana", "banana-asset", sc.value_b, -1},
        };
        graph_->leaders = {sc.alice};

        if (hedged_ && rounds_ > 0) {
            auto amounts = bootstrap_amounts(sc.value_a, sc.value_b, sc.boot_divisor, rounds_);
            for (const auto& br : amounts) {
                int j = br.round;
                if (!br.leader_amount.is_integral() || !br.follower_amount.is_integral())
                    throw std::invalid_argument("bootstrap premiums not integral in smallest units");
                StackSpec bs;  // banana stack level j, protects (A+B)-side
                bs.level = j;
                bs.depositor = (j % 2 == 1) ? sc.alice : sc.bob;
                bs.beneficiary = (j % 2 == 1) ? sc.bob : sc.alice;
                bs.amount = br.leader_amount.to_amount();
                bs.deposit_tick = Tick(2 * (rounds_ - j));
                banana_stack_.push_back(bs);
                StackSpec as;  // apricot stack level j
                as.level = j;
                as.depositor = (j % 2 == 1) ? sc.bob : sc.alice;
                as.beneficiary = (j % 2 == 1) ? sc.alice : sc.bob;
                as.amount = br.follower_amount.to_amount();
                as.deposit_tick = Tick(2 * (rounds_ - j)) + 1;
                apricot_stack_.push_back(as);
            }
        } else if (hedged_) {
            StackSpec bs;
            bs.level = 1;
            bs.depositor = sc.alice;
            bs.beneficiary = sc.bob;
            bs.amount = sc.alice_premium + sc.bob_premium;
            bs.deposit_tick = 0;
            banana_stack_.push_back(bs);
            StackSpec as;
            as.level = 1;
            as.depositor = sc.bob;
            as.beneficiary = sc.alice;
            as.amount = sc.bob_premium;
            as.deposit_tick = 1;
            apricot_stack_.push_back(as);
        }
        base_offset_ = hedged_ ? Tick(2 * std::max(rounds_, 1)) : 0;
    }

    std::vector<PartyId> parties() const override {
        return {scenario_.alice, scenario_.bob};
    }

    Amount hedged_floor(const PartyId& p) const override {
        const auto& sc = scenario_;
        if (rounds_ > 0) {
            // the innermost stack level is the live swap premium
            Amount pa = banana_stack_.back().amount - apricot_stack_.back().amount;
            return p == sc.bob ? pa : apricot_stack_.back().amount;
        }
        return p == scenario_.bob ? sc.alice_premium : sc.bob_premium;
    }

    std::vector<Obligation> obligations() const override {
        std::vector<Obligation> obls;
        int id = 0;
        Tick tpd = scenario_.ticks_per_delta;
        auto add = [&](const PartyId& p, const std::string& cls, Tick dt) {
            obls.push_back({id++, p, cls, dt * tpd});
        };
        for (const auto& s : banana_stack_)
            add(s.depositor, deposit_cls("banana", s.level), s.deposit_tick);
        for (const auto& s : apricot_stack_)
            add(s.depositor, deposit_cls("apricot", s.level), s.deposit_tick);
        add(scenario_.alice, "escrow", base_offset_);
        add(scenario_.bob, "escrow", base_offset_ + 1);
        add(scenario_.alice, "reveal", base_offset_ + 2);
        add(scenario_.bob, "redeem", base_offset_ + 3);
        std::sort(obls.begin(), obls.end(), [](const Obligation& a, const Obligation& b) {
            return std::tie(a.tick, a.party, a.cls) < std::tie(b.tick, b.party, b.cls);
        });
        for (size_t i = 0; i < obls.size(); ++i) obls[i].id = int(i);
        return obls;
    }

protected:
    RunResult run_impl(const StrategyProfile& profile, CryptoSuite& suite,
                       FaultFlags faults) const override;

private:
    int find_obl(const std::vector<Obligation>& obls, const PartyId& p,
                 const std::string& cls) const {
        for (const auto& o : obls)
            if (o.party == p && o.cls == cls) return o.id;
        throw std::logic_error("obligation not found: " + cls);
    }
    std::string deposit_cls(const char* chain, int level) const {
        if (rounds_ == 0) return "premium";
        return std::string("deposit:") + chain + "-L" + std::to_string(level);
    }

    bool hedged_;
    int rounds_;  // 0 = plain hedged / base
    std::shared_ptr<SwapDigraph> graph_;
    std::vector<StackSpec> banana_stack_;   // outermost first
    std::vector<StackSpec> apricot_stack_;
    Tick base_offset_ = 0;  // Delta units; escrow phase start
};

RunResult TwoPartyFamilyDriver::run_impl(const StrategyProfile& profile,
                                         CryptoSuite& suite, FaultFlags faults) const {
    const auto& sc = scenario_;
    const Tick tpd = sc.ticks_per_delta;
    auto d = [&](Tick n) { return n * tpd; };

    World w(suite, int(tpd), faults);
    w.add_chain("apricot");
    w.add_chain("banana");
    for (const auto& s : banana_stack_) w.fund("banana", s.depositor, s.amount);
    for (const auto& s : apricot_stack_) w.fund("apricot", s.depositor, s.amount);

    Secret secret = suite.derive_secret(sc.name + "/swap-secret");
    Digest32 h = make_hashlock(suite, secret);

    const Tick off = base_offset_;
    auto& banana = w.add_contract<EscrowContract>("banana:" + sc.bob + "->" + sc.alice, "banana");
    banana.legs = {{sc.bob, sc.alice, true, sc.bob, 0, false}};
    banana.lots = {{"banana-asset", sc.value_b, sc.bob, sc.alice}};
    banana.escrow_party = sc.bob;
    banana.escrow_deadline = d(off + 2);   // t_be
    banana.redeem_deadline = d(off + 3);   // t_A
    banana.hashlocks = {h};
    banana.graph = graph_;
    banana.expiry_anchor = d(off + 2);
    banana.valid_heads = {sc.alice};

    auto& apricot = w.add_contract<EscrowContract>("apricot:" + sc.alice + "->" + sc.bob, "apricot");
    apricot.legs = {{sc.alice, sc.bob, true, sc.alice, 0, false}};
    apricot.lots = {{"apricot-asset", sc.value_a, sc.alice, sc.bob}};
    apricot.escrow_party = sc.alice;
    apricot.escrow_deadline = d(off + 1);  // t_ae
    apricot.redeem_deadline = d(off + 4);  // t_B
    apricot.hashlocks = {h};
    apricot.graph = graph_;
    apricot.expiry_anchor = d(off + 2);
    apricot.valid_heads = {sc.bob};

    if (!hedged_) {
        // literal base schedule: t_B = 2*Delta, t_A = 3*Delta
        apricot.escrow_deadline = d(1);
        apricot.redeem_deadline = d(3);
        banana.escrow_deadline = d(2);
        banana.redeem_deadline = d(2);
        apricot.expiry_anchor = d(1);
        banana.expiry_anchor = d(1);
    }

    // Premium ladders. Once the next round's deposit lands, the previous
    // round's premium is refunded, except the follower-side premium of each
    // round, which keeps covering until its depositor's round-after-next
    // contribution arrives (the principal for level 2) and forfeits if that
    // contribution never comes. Innermost level carries the plain hedged-swap
    // premium semantics.
    auto build_stack = [&](EscrowContract& c, const std::vector<StackSpec>& stack,
                           const char* tag, bool leader_side) {
        for (size_t i = 0; i < stack.size(); ++i) {
            const auto& sp = stack[i];
            PremiumSlot slot;
            slot.label = std::string(rounds_ > 0 ? "bootstrap:" : "swap:") + tag + "-L" +
                         std::to_string(sp.level);
            slot.category = rounds_ > 0 ? SlotCategory::bootstrap : SlotCategory::swap;
            slot.depositor = sp.depositor;
            slot.beneficiary = sp.beneficiary;
            slot.amount = sp.amount;
            slot.deposit_deadline = d(sp.deposit_tick + 1);
            if (sp.level == 1) {
                slot.guard = Cond{CondKind::principal_escrowed, -1};
                slot.guard_deadline = c.escrow_deadline;
                slot.success = Cond{CondKind::principal_redeemed, -1};
                slot.forfeit_deadline = c.redeem_deadline;
            } else if (leader_side) {
                // retired as soon as the next-round deposit below it lands
                slot.guard = Cond{CondKind::slot_deposited, int(i + 1)};
                slot.guard_deadline = d(stack[i + 1].deposit_tick + 1);
                slot.success = Cond{CondKind::slot_deposited, int(i + 1)};
                slot.forfeit_deadline = slot.guard_deadline;
            } else {
                slot.guard = Cond{CondKind::slot_deposited, int(i + 1)};
                slot.guard_deadline = d(stack[i + 1].deposit_tick + 1);
                if (sp.level >= 3) {
                    slot.success = Cond{CondKind::slot_deposited, int(i + 2)};
                    slot.forfeit_deadline = d(stack[i + 2].deposit_tick + 1);
                } else {
                    slot.success = Cond{CondKind::principal_escrowed, -1};
                    slot.forfeit_deadline = c.escrow_deadline;
                }
            }
            c.slots.push_back(std::move(slot));
        }
    };
    if (hedged_) {
        build_stack(banana, banana_stack_, "banana", true);
        build_stack(apricot, apricot_stack_, "apricot", false);
    }
    banana.publish(w);
    apricot.publish(w);

    auto obls = obligations();
    Conduct conduct(obls, profile);
    ActionPlan plan;

    // own-progress flags; a party truncates every obligation whose
    // predecessor it skipped or whose observed prerequisite failed
    std::map<std::string, bool> done;
    std::map<std::string, bool> perf;  // actually performed, not just reached
    auto once = [&](const std::string& key) {
        if (done[key]) return false;
        done[key] = true;
        return true;
    };

    // deposit ladder, outermost round first; prerequisites stay on the
    // depositor's own chain except where the hedged swap itself crosses
    struct DepRef {
        const StackSpec* spec;
        EscrowContract* contract;
        int slot;
        std::string cls;
        EscrowContract* prereq_contract = nullptr;  // none for the first rung
        int prereq_slot = -1;
    };
    std::vector<DepRef> deposit_order;
    for (size_t i = 0; i < banana_stack_.size(); ++i) {
        DepRef b{&banana_stack_[i], &banana, int(i),
                 deposit_cls("banana", banana_stack_[i].level), nullptr, -1};
        if (i > 0) {  // round j starts once round j+1 completed on apricot
            b.prereq_contract = &apricot;
            b.prereq_slot = int(i) - 1;
        }
        deposit_order.push_back(b);
        DepRef a{&apricot_stack_[i], &apricot, int(i),
                 deposit_cls("apricot", apricot_stack_[i].level), nullptr, -1};
        if (i == 0 || rounds_ == 0) {  // round partner on the banana side
            a.prereq_contract = &banana;
            a.prereq_slot = int(i);
        } else {  // deeper rounds: own-chain ladder only
            a.prereq_contract = &apricot;
            a.prereq_slot = int(i) - 1;
        }
        deposit_order.push_back(a);
    }

    const Tick horizon = hedged_ ? d(off + 5) : d(4);
    while (w.now() < horizon) {
        Tick t = w.now();
        w.begin_tick();
        plan.flush(w);

        auto banana_view = [&](const PartyId& p) {
            return view_contract(w, p, "banana", banana.id(), t);
        };
        auto apricot_view = [&](const PartyId& p) {
            return view_contract(w, p, "apricot", apricot.id(), t);
        };

        if (hedged_) {
            for (const auto& dep : deposit_order) {
                const PartyId& p = dep.spec->depositor;
                std::string key = "dep:" + dep.contract->id() + ":" + std::to_string(dep.slot);
                if (done[key] || t < d(dep.spec->deposit_tick)) continue;
                if (dep.prereq_contract) {
                    auto vw = view_contract(w, p, dep.prereq_contract->chain(),
                                            dep.prereq_contract->id(), t);
                    if (!vw.slots_deposited.count(dep.prereq_slot)) continue;
                }
                if (once(key))
                    perf[key] = plan.emit(w, conduct, find_obl(obls, p, dep.cls),
                                          make_deposit(p, dep.contract->chain(),
                                                       dep.contract->id(), dep.slot,
                                                       dep.spec->amount));
            }
        }

        // alice escrows once the innermost premiums are in place from her view
        {
            bool ready = !hedged_ || apricot_view(sc.alice).slots_deposited.count(
                                         int(apricot_stack_.size()) - 1) > 0;
            bool self_ok =
                !hedged_ ||
                perf["dep:" + banana.id() + ":" + std::to_string(banana_stack_.size() - 1)];
            if (ready && self_ok && t >= d(off) && !done["a-escrow"] && once("a-escrow"))
                perf["a-escrow"] = plan.emit(w, conduct, find_obl(obls, sc.alice, "escrow"),
                                             make_escrow(sc.alice, "apricot", apricot.id()));
        }
        {
            bool ready = apricot_view(sc.bob).escrowed &&
                         (!hedged_ || banana_view(sc.bob).slots_deposited.count(
                                          int(banana_stack_.size()) - 1) > 0);
            bool self_ok =
                !hedged_ ||
                perf["dep:" + apricot.id() + ":" + std::to_string(apricot_stack_.size() - 1)];
            if (ready && self_ok && !done["b-escrow"] && once("b-escrow"))
                perf["b-escrow"] = plan.emit(w, conduct, find_obl(obls, sc.bob, "escrow"),
                                             make_escrow(sc.bob, "banana", banana.id()));
        }
        if (perf["a-escrow"] && banana_view(sc.alice).escrowed && !done["a-reveal"] &&
            once("a-reveal")) {
            plan.emit(w, conduct, find_obl(obls, sc.alice, "reveal"),
                      make_present(sc.alice, "banana", banana.id(),
                                   initial_hashkey(suite, secret, sc.alice)));
        }
        {
            auto bv = banana_view(sc.bob);
            auto it = bv.keys.find(0);
            if (perf["b-escrow"] && it != bv.keys.end() && !done["b-redeem"] &&
                once("b-redeem")) {
                auto ext = extend_hashkey(suite, it->second, sc.bob);
                if (ext.key)
                    plan.emit(w, conduct, find_obl(obls, sc.bob, "redeem"),
                              make_present(sc.bob, "apricot", apricot.id(), *ext.key));
            }
        }

        w.apply_actions();
        w.end_tick();
    }

    RunResult r;
    r.events = w.events();
    r.trace_hash = w.trace_hash();
    r.quiescent = w.all_quiescent();
    r.final_tick = w.now();
    r.contract_states = {{banana.id(), banana.state_name()},
                         {apricot.id(), apricot.state_name()}};
    std::ostringstream os;
    os << to_string(sc.kind) << " escrow-phase=" << (off) << "D redeem-deadlines=["
       << (off + 3) << "D," << (off + 4) << "D] tpd=" << tpd;
    r.schedule_desc = os.str();
    return r;
}

// ===========================================================================
// Hedged multi-party swap. Four phases: escrow premiums, redemption premiums,
// escrows, hashkeys. Phase boundaries derive from the digraph's wait-depth
// cascade and longest premium path; the derived schedule is published in the
// trace header events.
// ===========================================================================

class MultiPartyDriver final : public ProtocolDriver {
public:
    explicit MultiPartyDriver(Scenario s) : ProtocolDriver(std::move(s)) {
        graph_ = std::make_shared<SwapDigraph>(scenario_.digraph);
        auto lv = validate_leaders(*graph_);
        if (!lv.ok) throw std::invalid_argument("multi-party: leaders are not a FVS");
        if (!is_strongly_connected(*graph_))
            throw std::invalid_argument("multi-party: digraph not strongly connected");
        depths_ = escrow_wait_depth(*graph_);
        for (const auto& [_, dd] : depths_) maxobs_ = std::max(maxobs_, dd);
        cascade_ = redemption_cascade(*graph_, scenario_.premium);
        for (const auto& c : cascade_) lmax_ = std::max<int>(lmax_, int(c.path.size()));
        t2_ = maxobs_ + 1;
        t3_ = t2_ + lmax_;
        t4_ = t3_ + maxobs_ + 1;
        leaders_.assign(graph_->leaders.begin(), graph_->leaders.end());
        std::sort(leaders_.begin(), leaders_.end());
    }

    std::vector<PartyId> parties() const override { return graph_->vertices; }
    Amount hedged_floor(const PartyId&) const override { return scenario_.premium; }
    bool has_activation_slots() const override { return true; }

    std::vector<Obligation> obligations() const override {
        std::vector<Obligation> obls;
        int id = 0;
        Tick tpd = scenario_.ticks_per_delta;
        for (const auto& v : graph_->vertices) {
            obls.push_back({id++, v, "phase1", depths_.at(v) * tpd});
            obls.push_back({id++, v, "phase2", (t2_ + 0) * tpd});
            obls.push_back({id++, v, "phase3", (t3_ + depths_.at(v)) * tpd});
            obls.push_back({id++, v, "phase4", t4_ * tpd});
        }
        return obls;
    }

    Tick phase4_start_delta() const { return t4_; }

protected:
    RunResult run_impl(const StrategyProfile&, CryptoSuite&, FaultFlags) const override;

private:
    std::shared_ptr<SwapDigraph> graph_;
    std::map<PartyId, int> depths_;
    int maxobs_ = 0;
    std::vector<RedemptionDeposit> cascade_;
    int lmax_ = 0;
    Tick t2_ = 0, t3_ = 0, t4_ = 0;
    std::vector<PartyId> leaders_;
};

RunResult MultiPartyDriver::run_impl(const StrategyProfile& profile, CryptoSuite& suite,
                                     FaultFlags faults) const {
    const auto& sc = scenario_;
    const Tick tpd = sc.ticks_per_delta;
    auto d = [&](Tick n) { return n * tpd; };

    World w(suite, int(tpd), faults);
    for (const auto& a : graph_->arcs)
        if (!w.has_chain(a.chain)) w.add_chain(a.chain);

    // secrets and hashlocks, one per leader
    std::map<PartyId, Secret> secrets;
    std::vector<Digest32> hashlocks;
    for (const auto& l : leaders_) {
        secrets[l] = suite.derive_secret(sc.name + "/k-" + l);
        hashlocks.push_back(make_hashlock(suite, secrets[l]));
    }

    auto contract_id = [&](const Arc& a) { return a.chain + ":" + a.from + "->" + a.to; };

    // escrow premium slot is index 0; redemption slots follow in cascade order
    std::map<std::string, EscrowContract*> contracts;
    std::map<std::pair<std::string, int>, int> red_slot;  // (contract, leader idx) -> slot
    for (const auto& a : graph_->arcs) {
        auto& c = w.add_contract<EscrowContract>(contract_id(a), a.chain);
        c.legs = {{a.from, a.to, true, a.from, 0, false}};
        c.lots = {{a.asset, a.value, a.from, a.to}};
        c.escrow_party = a.from;
        c.escrow_deadline = d(t3_ + depths_.at(a.from) + 1);
        c.redeem_deadline = d(t4_ + max_path_len_from(*graph_, a.to));
        c.hashlocks = hashlocks;
        c.graph = graph_;
        c.expiry_anchor = d(t4_);
        c.valid_heads = {a.to};

        PremiumSlot es;
        es.label = "escrow:E(" + a.from + "->" + a.to + ")";
        es.category = SlotCategory::escrow;
        es.depositor = a.from;
        es.beneficiary = a.to;
        es.amount = escrow_premium(*graph_, a.from, a.to, sc.premium);
        es.deposit_deadline = d(depths_.at(a.from) + 1);
        es.needs_activation = true;
        es.leg = 0;
        es.success = Cond{CondKind::principal_escrowed, -1};
        es.forfeit_deadline = c.escrow_deadline;
        c.slots.push_back(std::move(es));
        contracts[c.id()] = &c;
    }
    for (const auto& dep : cascade_) {
        auto* c = contracts.at(dep.chain + ":" + dep.on_from + "->" + dep.on_to);
        PremiumSlot rs;
        rs.label = "redemption:k[" + dep.leader + "](" + dep.on_from + "->" + dep.on_to + ")";
        rs.category = SlotCategory::redemption;
        rs.depositor = dep.depositor;
        rs.beneficiary = dep.beneficiary;
        rs.amount = dep.amount;
        rs.deposit_deadline = d(t2_ + dep.wave + 1);
        rs.hashlock = dep.leader_index;
        rs.path = dep.path;
        rs.success = Cond{CondKind::hashlock_unlocked, dep.leader_index};
        rs.forfeit_deadline = d(t4_ + Tick(dep.path.size()));
        red_slot[{c->id(), dep.leader_index}] = int(c->slots.size());
        c->slots.push_back(std::move(rs));
    }
    for (auto& [_, c] : contracts) {
        w.fund(c->chain(), c->escrow_party, c->slots[0].amount);
        for (size_t i = 1; i < c->slots.size(); ++i)
            w.fund(c->chain(), c->slots[i].depositor, c->slots[i].amount);
        c->publish(w);
    }

    auto obls = obligations();
    Conduct conduct(obls, profile);
    ActionPlan plan;
    auto obl_of = [&](const PartyId& p, const std::string& cls) {
        for (const auto& o : obls)
            if (o.party == p && o.cls == cls) return o.id;
        throw std::logic_error("no obligation " + cls);
    };

    std::map<std::string, bool> done;
    std::map<std::string, bool> perf;
    auto once = [&](const std::string& key) {
        if (done[key]) return false;
        done[key] = true;
        return true;
    };
    auto view = [&](const PartyId& p, const EscrowContract* c, Tick t) {
        return view_contract(w, p, c->chain(), c->id(), t);
    };

    const Tick horizon = d(t4_ + lmax_ + 1);
    while (w.now() < horizon) {
        Tick t = w.now();
        w.begin_tick();
        plan.flush(w);

        for (const auto& v : graph_->vertices) {
            // phase 1: escrow premiums; leaders first, followers once all
            // incoming escrow premiums are visible
            if (!done["p1:" + v]) {
                bool ready = true;
                if (!graph_->is_leader(v)) {
                    for (const Arc* a : graph_->in_arcs(v)) {
                        auto* c = contracts.at(contract_id(*a));
                        if (!view(v, c, t).slots_deposited.count(0)) { ready = false; break; }
                    }
                }
                if (ready && once("p1:" + v)) {
                    for (const Arc* a : graph_->out_arcs(v)) {
                        auto* c = contracts.at(contract_id(*a));
                        plan.emit(w, conduct, obl_of(v, "phase1"),
                                  make_deposit(v, c->chain(), c->id(), 0, c->slots[0].amount));
                    }
                }
            }
            // phase 2: redemption premiums, leader deposits then first-wins
            // extensions (cascade precomputed; deviations can only stall it).
            // A leader missing any incoming escrow premium skips its own
            // deposits entirely and recovers later by releasing its hashkey.
            for (size_t li = 0; li < leaders_.size(); ++li) {
                const PartyId& leader = leaders_[li];
                if (v == leader) {
                    bool phase1_done = true;
                    for (const Arc* a : graph_->in_arcs(v))
                        if (!view(v, contracts.at(contract_id(*a)), t).slots_deposited.count(0))
                            phase1_done = false;
                    if (!phase1_done) continue;
                    for (const Arc* a : graph_->in_arcs(v)) {
                        auto* c = contracts.at(contract_id(*a));
                        std::string key = "p2own:" + v + ":" + c->id();
                        if (done[key]) continue;
                        auto it = red_slot.find({c->id(), int(li)});
                        if (it == red_slot.end()) { done[key] = true; continue; }
                        if (once(key))
                            plan.emit(w, conduct, obl_of(v, "phase2"),
                                      make_deposit(v, c->chain(), c->id(), it->second,
                                                   c->slots[it->second].amount));
                    }
                    continue;
                }
                std::string key = "p2ext:" + v + ":" + leader;
                if (done[key]) continue;
                // my cascade deposits for this leader, all sharing one trigger
                std::vector<const RedemptionDeposit*> mine;
                for (const auto& dep : cascade_)
                    if (dep.depositor == v && dep.leader == leader && dep.wave > 0)
                        mine.push_back(&dep);
                if (mine.empty()) { done[key] = true; continue; }
                const auto& upstream_arc = *graph_->find_arc(v, mine.front()->path[1]);
                auto* uc = contracts.at(contract_id(upstream_arc));
                auto uslot = red_slot.find({uc->id(), int(li)});
                if (uslot == red_slot.end()) { done[key] = true; continue; }
                if (view(v, uc, t).slots_deposited.count(uslot->second) && once(key)) {
                    for (const auto* dep : mine) {
                        auto* c = contracts.at(dep->chain + ":" + dep->on_from + "->" + dep->on_to);
                        int slot = red_slot.at({c->id(), int(li)});
                        plan.emit(w, conduct, obl_of(v, "phase2"),
                                  make_deposit(v, c->chain(), c->id(), slot, dep->amount));
                    }
                }
            }
            // phase 3: escrows on activated arcs; followers wait for all
            // incoming assets
            if (Tick(d(t3_)) <= t) {
                bool incoming_ok = true;
                if (!graph_->is_leader(v)) {
                    for (const Arc* a : graph_->in_arcs(v))
                        if (!view(v, contracts.at(contract_id(*a)), t).escrowed) {
                            incoming_ok = false;
                            break;
                        }
                }
                if (incoming_ok) {
                    for (const Arc* a : graph_->out_arcs(v)) {
                        auto* c = contracts.at(contract_id(*a));
                        std::string key = "p3:" + c->id();
                        if (done[key]) continue;
                        if (!view(v, c, t).slots_active.count(0)) continue;
                        if (once(key))
                            perf[key] = plan.emit(w, conduct, obl_of(v, "phase3"),
                                                  make_escrow(v, c->chain(), c->id()));
                    }
                }
            }
            // phase 4: leaders release when every incoming asset arrived, or
            // when they escrowed nothing and only premiums are at stake
            if (Tick(d(t4_)) <= t && graph_->is_leader(v) && !done["p4rel:" + v]) {
                bool all_in = true;
                for (const Arc* a : graph_->in_arcs(v))
                    if (!view(v, contracts.at(contract_id(*a)), t).escrowed) {
                        all_in = false;
                        break;
                    }
                bool own_escrowed = false;
                for (const Arc* a : graph_->out_arcs(v))
                    if (perf["p3:" + contract_id(*a)]) own_escrowed = true;
                if (all_in || !own_escrowed) {
                    if (once("p4rel:" + v)) {
                        Hashkey k = initial_hashkey(suite, secrets.at(v), v);
                        for (const Arc* a : graph_->in_arcs(v)) {
                            if (conduct.withheld(obl_of(v, "phase4"), a->from, a->to)) continue;
                            auto* c = contracts.at(contract_id(*a));
                            plan.emit(w, conduct, obl_of(v, "phase4"),
                                      make_present(v, c->chain(), c->id(), k));
                        }
                    }
                }
            }
            // phase 4: propagate observed hashkeys backwards
            if (Tick(d(t4_)) <= t) {
                for (size_t li = 0; li < leaders_.size(); ++li) {
                    if (leaders_[li] == v) continue;
                    std::string key = "p4prop:" + v + ":" + leaders_[li];
                    if (done[key]) continue;
                    std::optional<Hashkey> seen;
                    for (const Arc* a : graph_->out_arcs(v)) {
                        auto cv = view(v, contracts.at(contract_id(*a)), t);
                        auto it = cv.keys.find(int(li));
                        if (it != cv.keys.end()) { seen = it->second; break; }
                    }
                    if (!seen) continue;
                    done[key] = true;
                    auto ext = extend_hashkey(suite, *seen, v);
                    if (!ext.key || ext.key->cycle ||
                        classify_sequence(*graph_, ext.key->path) != PathShape::path)
                        continue;
                    for (const Arc* a : graph_->in_arcs(v)) {
                        if (conduct.withheld(obl_of(v, "phase4"), a->from, a->to)) continue;
                        auto* c = contracts.at(contract_id(*a));
                        if (view(v, c, t).keys.count(int(li))) continue;  // already there
                        plan.emit(w, conduct, obl_of(v, "phase4"),
                                  make_present(v, c->chain(), c->id(), *ext.key));
                    }
                }
            }
        }

        w.apply_actions();
        w.end_tick();
    }

    RunResult r;
    r.events = w.events();
    r.trace_hash = w.trace_hash();
    r.quiescent = w.all_quiescent();
    r.final_tick = w.now();
    for (const auto& [id, c] : contracts) r.contract_states[id] = c->state_name();
    std::ostringstream os;
    os << "multi-party phases: P2@" << t2_ << "D P3@" << t3_ << "D P4@" << t4_
       << "D horizon@" << (t4_ + lmax_ + 1) << "D tpd=" << tpd;
    r.schedule_desc = os.str();
    return r;
}

}  // namespace

// broker and auction drivers live in this translation unit too
#include "protocols_broker.inc"
#include "protocols_auction.inc"

std::unique_ptr<ProtocolDriver> make_driver(const Scenario& s) {
    switch (s.kind) {
        case ProtocolKind::two_party_base:
            return std::make_unique<TwoPartyFamilyDriver>(s, false, 0);
        case ProtocolKind::two_party_hedged:
            return std::make_unique<TwoPartyFamilyDriver>(s, true, 0);
        case ProtocolKind::bootstrap: {
            int r = s.boot_rounds;
            if (r <= 0) r = bootstrap_rounds(s.value_a, s.value_b, s.boot_divisor, s.boot_p0);
            return std::make_unique<TwoPartyFamilyDriver>(s, true, std::max(r, 1));
        }
        case ProtocolKind::multi_party:
            return std::make_unique<MultiPartyDriver>(s);
        case ProtocolKind::broker:
            return std::make_unique<BrokerDriver>(s);
        case ProtocolKind::auction:
            return std::make_unique<AuctionDriver>(s);
    }
    throw std::invalid_argument("unknown protocol kind");
}

RunResult run_scenario(const Scenario& s, const StrategyProfile& profile,
                       FaultFlags faults) {
    auto suite = make_fast_crypto(s.seed);
    auto driver = make_driver(s);
    return driver->run(profile, *suite, faults);
}

}  // namespace hedgesim
