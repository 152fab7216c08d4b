#pragma once

#include <memory>

#include "hedgesim/contracts.hpp"
#include "hedgesim/scenario.hpp"
#include "hedgesim/sim.hpp"

namespace hedgesim {

// A point in the protocol where a compliant party owes an action (or a
// coherent batch of actions, e.g. one premium phase).
struct Obligation {
    int id = 0;
    PartyId party;
    std::string cls;    // "premium", "escrow", "reveal", "phase1", "declare", ...
    Tick tick = 0;      // compliant-case tick, in ticks
};

enum class DirectiveKind {
    omit,
    delay,
    wrong_key,              // auction: declare the loser's hashkey
    one_sided,              // auction: publish on one chain only
    wrong_key_one_sided,
    withhold_arcs,          // skip hashkey release/propagation on given arcs
};

struct Directive {
    int obligation_id = -1;
    DirectiveKind kind = DirectiveKind::omit;
    int delay = 0;                                        // in ticks
    std::string chain;                                    // one_sided target
    std::vector<std::pair<PartyId, PartyId>> arcs;        // withhold subset
};

struct StrategyProfile {
    std::map<PartyId, std::vector<Directive>> directives;

    bool deviating(const PartyId& p) const {
        auto it = directives.find(p);
        return it != directives.end() && !it->second.empty();
    }
    bool all_compliant() const {
        for (const auto& [_, d] : directives)
            if (!d.empty()) return false;
        return true;
    }
    std::string describe(const std::vector<Obligation>& obls) const;
};

struct PartyPayoff {
    Amount principal_delta = 0;       // nominal values, redeems only
    Amount premium_delta = 0;         // awards received minus deposits lost
    Amount escrow_trading_delta = 0;  // escrow- and trading-category slots
    Amount redemption_delta = 0;
    int escrowed_unredeemed = 0;      // contracts whose escrowed principal refunded
};

struct RunResult {
    std::vector<Event> events;
    std::map<PartyId, PartyPayoff> payoffs;
    std::uint64_t trace_hash = 0;
    bool quiescent = false;
    Tick final_tick = 0;
    std::map<std::string, std::string> contract_states;
    std::string schedule_desc;
};

std::map<PartyId, PartyPayoff> payoffs_from_events(const std::vector<Event>& events);

class ProtocolDriver {
public:
    explicit ProtocolDriver(Scenario s) : scenario_(std::move(s)) {}
    virtual ~ProtocolDriver() = default;

    const Scenario& scenario() const { return scenario_; }
    virtual std::vector<PartyId> parties() const = 0;
    virtual std::vector<Obligation> obligations() const = 0;
    // Compensation a compliant party must clear per locked principal.
    virtual Amount hedged_floor(const PartyId& p) const = 0;
    virtual bool has_activation_slots() const { return false; }

    RunResult run(const StrategyProfile& profile, CryptoSuite& suite,
                  FaultFlags faults = {}) const;

protected:
    virtual RunResult run_impl(const StrategyProfile&, CryptoSuite&,
                               FaultFlags) const = 0;
    Scenario scenario_;
};

std::unique_ptr<ProtocolDriver> make_driver(const Scenario& s);

// run + payoff in one go with the fast crypto suite (test convenience)
RunResult run_scenario(const Scenario& s, const StrategyProfile& profile = {},
                       FaultFlags faults = {});

}  // namespace hedgesim
