#include "hedgesim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hedgesim/premiums.hpp"

namespace hedgesim {

using nlohmann::json;

Scenario two_party_hedged_scenario(Amount p_a, Amount p_b) {
    Scenario s;
    s.name = "two-party-hedged";
    s.kind = ProtocolKind::two_party_hedged;
    s.alice_premium = p_a;
    s.bob_premium = p_b;
    s.value_a = 100;
    s.value_b = 100;
    return s;
}

Scenario two_party_base_scenario() {
    Scenario s = two_party_hedged_scenario();
    s.name = "two-party-base";
    s.kind = ProtocolKind::two_party_base;
    return s;
}

Scenario bootstrap_scenario(Amount asset_a, Amount asset_b, Amount divisor, int rounds) {
    Scenario s;
    s.name = "bootstrap-r" + std::to_string(rounds);
    s.kind = ProtocolKind::bootstrap;
    s.value_a = asset_a;
    s.value_b = asset_b;
    s.boot_divisor = divisor;
    s.boot_rounds = rounds;
    return s;
}

Scenario cycle_scenario(int n, Amount p) {
    if (n < 2) throw std::invalid_argument("cycle needs >= 2 parties");
    Scenario s;
    s.name = std::to_string(n) + "-cycle";
    s.kind = ProtocolKind::multi_party;
    s.premium = p;
    std::vector<PartyId> names = {"alice", "bob", "carol", "dave", "erin",
                                  "frank", "grace", "heidi"};
    for (int i = 0; i < n; ++i) s.digraph.vertices.push_back(names[i]);
    for (int i = 0; i < n; ++i) {
        const PartyId& u = s.digraph.vertices[i];
        const PartyId& v = s.digraph.vertices[(i + 1) % n];
        s.digraph.arcs.push_back({u, v, "ch-" + u + "-" + v, "asset-" + u, 100, -1});
    }
    s.digraph.leaders = {"alice"};
    return s;
}

Scenario fig3a_scenario(Amount p) {
    Scenario s;
    s.name = "hub-spoke";
    s.kind = ProtocolKind::multi_party;
    s.premium = p;
    s.digraph.vertices = {"alice", "bob", "carol"};
    s.digraph.arcs = {
        {"bob", "alice", "ch-b-a", "asset-b", 100, -1},
        {"carol", "alice", "ch-c-a", "asset-c", 100, -1},
        {"alice", "bob", "ch-a-b", "asset-ab", 100, -1},
        {"alice", "carol", "ch-a-c", "asset-ac", 100, -1},
    };
    s.digraph.leaders = {"alice"};
    return s;
}

Scenario broker_scenario(Amount p) {
    Scenario s;
    s.name = "broker";
    s.kind = ProtocolKind::broker;
    s.premium = p;
    s.broker = "alice";
    s.digraph.vertices = {"alice", "bob", "carol"};
    s.digraph.arcs = {
        {"bob", "alice", "ticket", "tickets", 100, -1},
        {"carol", "alice", "coin", "coins", 101, -1},
        {"alice", "carol", "ticket", "tickets", 100, -1},
        {"alice", "bob", "coin", "coins", 100, -1},
    };
    s.digraph.leaders = {"alice", "bob", "carol"};
    return s;
}

Scenario auction_scenario(std::vector<std::pair<PartyId, Amount>> bids, Amount p) {
    Scenario s;
    s.name = "auction-" + std::to_string(bids.size());
    s.kind = ProtocolKind::auction;
    s.premium = p;
    s.auctioneer = "alice";
    s.bids = std::move(bids);
    s.ticket_value = 50;
    return s;
}

const char* to_string_kind(ProtocolKind k) { return to_string(k); }

namespace {

ProtocolKind kind_from_string(const std::string& s) {
    if (s == "two-party-base") return ProtocolKind::two_party_base;
    if (s == "two-party-hedged") return ProtocolKind::two_party_hedged;
    if (s == "bootstrap") return ProtocolKind::bootstrap;
    if (s == "multi-party") return ProtocolKind::multi_party;
    if (s == "broker") return ProtocolKind::broker;
    if (s == "auction") return ProtocolKind::auction;
    throw std::invalid_argument("unknown protocol kind: " + s);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario parse error: ") + e.what());
    }
    Scenario s;
    try {
        s.kind = kind_from_string(j.at("protocol").get<std::string>());
        s.name = j.value("name", std::string(to_string(s.kind)));
        s.ticks_per_delta = j.value("delta_ticks", 1);
        s.premium = j.value("premium", Amount(1));
        s.seed = j.value("seed", std::uint64_t(0));
        if (j.contains("parties")) {
            const auto& p = j["parties"];
            s.alice = p.value("alice", s.alice);
            s.bob = p.value("bob", s.bob);
        }
        s.alice_premium = j.value("alice_premium", Amount(0));
        s.bob_premium = j.value("bob_premium", Amount(0));
        s.value_a = j.value("value_a", Amount(100));
        s.value_b = j.value("value_b", Amount(100));
        if (j.contains("bootstrap")) {
            const auto& b = j["bootstrap"];
            s.boot_divisor = b.value("premium_divisor", Amount(0));
            s.boot_rounds = b.value("rounds", 0);
            s.boot_p0 = b.value("initial_premium", Amount(0));
        }
        if (j.contains("digraph")) {
            const auto& g = j["digraph"];
            for (const auto& v : g.at("vertices"))
                s.digraph.vertices.push_back(v.get<std::string>());
            for (const auto& a : g.at("arcs")) {
                Arc arc;
                arc.from = a.at("from").get<std::string>();
                arc.to = a.at("to").get<std::string>();
                arc.chain = a.value("chain", "ch-" + arc.from + "-" + arc.to);
                arc.asset = a.value("asset", "asset-" + arc.from + "-" + arc.to);
                arc.value = a.value("value", Amount(100));
                arc.premium = a.value("premium", Amount(-1));
                s.digraph.arcs.push_back(std::move(arc));
            }
            for (const auto& l : g.at("leaders"))
                s.digraph.leaders.insert(l.get<std::string>());
        }
        s.broker = j.value("broker", std::string());
        if (j.contains("auction")) {
            const auto& a = j["auction"];
            s.auctioneer = a.value("auctioneer", std::string("alice"));
            for (const auto& [party, amt] : a.at("bids").items())
                s.bids.emplace_back(party, amt.get<Amount>());
            std::sort(s.bids.begin(), s.bids.end());
            s.ticket_value = a.value("ticket_value", Amount(50));
        }
        if (j.contains("check")) {
            const auto& c = j["check"];
            s.bounds.max_deviators = c.value("max_deviators", 2);
            s.bounds.max_delay = c.value("max_delay", 2);
            s.bounds.include_delays = c.value("include_delays", true);
            s.bounds.cap = c.value("cap", std::size_t(1000000));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario field error: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void validate_scenario(const Scenario& s) {
    if (s.ticks_per_delta < 1)
        throw std::invalid_argument("delta_ticks must be >= 1");
    if (s.premium <= 0) throw std::invalid_argument("premium must be positive");
    switch (s.kind) {
        case ProtocolKind::two_party_base:
        case ProtocolKind::two_party_hedged:
            if (s.alice_premium <= 0 || s.bob_premium <= 0)
                throw std::invalid_argument("two-party scenarios need alice_premium and bob_premium");
            break;
        case ProtocolKind::bootstrap: {
            if (s.boot_divisor <= 1)
                throw std::invalid_argument("bootstrap needs premium_divisor > 1");
            int r = s.boot_rounds;
            if (r <= 0) {
                if (s.boot_p0 <= 0)
                    throw std::invalid_argument("bootstrap needs rounds or initial_premium");
                r = bootstrap_rounds(s.value_a, s.value_b, s.boot_divisor, s.boot_p0);
            }
            for (const auto& br : bootstrap_amounts(s.value_a, s.value_b, s.boot_divisor,
                                                    std::max(r, 1)))
                if (!br.leader_amount.is_integral() || !br.follower_amount.is_integral())
                    throw std::invalid_argument(
                        "bootstrap premiums are not integral in smallest units; "
                        "pick divisible asset values");
            break;
        }
        case ProtocolKind::multi_party: {
            if (s.digraph.vertices.size() < 2)
                throw std::invalid_argument("multi-party needs >= 2 vertices");
            if (!is_strongly_connected(s.digraph))
                throw std::invalid_argument("digraph must be strongly connected");
            auto lv = validate_leaders(s.digraph);
            if (!lv.ok) {
                std::ostringstream os;
                os << "leaders are not a feedback vertex set; witness cycle:";
                for (const auto& v : lv.witness_cycle) os << " " << v;
                throw std::invalid_argument(os.str());
            }
            break;
        }
        case ProtocolKind::broker:
            if (s.broker.empty())
                throw std::invalid_argument("broker scenario needs a broker party");
            if (s.digraph.in_arcs(s.broker).empty() || s.digraph.out_arcs(s.broker).empty())
                throw std::invalid_argument("broker needs incoming and outgoing arcs");
            break;
        case ProtocolKind::auction:
            if (s.bids.size() < 2)
                throw std::invalid_argument("auction needs at least two bidders");
            if (s.auctioneer.empty())
                throw std::invalid_argument("auction needs an auctioneer");
            for (const auto& [b, amt] : s.bids)
                if (amt <= 0 || b == s.auctioneer)
                    throw std::invalid_argument("bad bid entry for " + b);
            break;
    }
}

}  // namespace hedgesim
