#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedgesim/amount.hpp"
#include "hedgesim/graph.hpp"

namespace hedgesim {

enum class ProtocolKind {
    two_party_base,
    two_party_hedged,
    bootstrap,
    multi_party,
    broker,
    auction,
};

const char* to_string(ProtocolKind k);

struct CheckBounds {
    int max_deviators = 2;
    int max_delay = 2;           // in Delta units
    bool include_delays = true;
    std::size_t cap = 1000000;   // explicit truncation above this
};

struct Scenario {
    std::string name;
    ProtocolKind kind = ProtocolKind::two_party_hedged;
    int ticks_per_delta = 1;
    Amount premium = 1;  // uniform p
    std::uint64_t seed = 0;

    // two-party / bootstrap
    PartyId alice = "alice";
    PartyId bob = "bob";
    Amount alice_premium = 0;  // p_a
    Amount bob_premium = 0;    // p_b
    Amount value_a = 100;      // apricot principal
    Amount value_b = 100;      // banana principal

    // bootstrap
    Amount boot_divisor = 0;  // P
    int boot_rounds = 0;      // r; derived from initial premium when 0
    Amount boot_p0 = 0;

    // multi-party / broker (vertices, arcs with chain+value, leaders)
    SwapDigraph digraph;
    PartyId broker;

    // auction
    PartyId auctioneer;
    std::vector<std::pair<PartyId, Amount>> bids;
    Amount ticket_value = 0;

    CheckBounds bounds;
};

// Canned scenarios used by tests and the docs.
Scenario two_party_hedged_scenario(Amount p_a = 2, Amount p_b = 3);
Scenario two_party_base_scenario();
Scenario bootstrap_scenario(Amount asset_a, Amount asset_b, Amount divisor, int rounds);
Scenario cycle_scenario(int n, Amount p = 1);  // n-cycle, single leader
Scenario fig3a_scenario(Amount p = 1);         // A<->B, A<->C, leader A
Scenario broker_scenario(Amount p = 1);
Scenario auction_scenario(std::vector<std::pair<PartyId, Amount>> bids, Amount p = 1);

// Parse/serialize and validation live in scenario.cpp (JSON front end).
struct ScenarioError {
    std::string message;
    std::vector<PartyId> witness_cycle;  // set for leader-set failures
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
void validate_scenario(const Scenario& s);  // throws std::invalid_argument

}  // namespace hedgesim
