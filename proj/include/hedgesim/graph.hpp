#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hedgesim/amount.hpp"
#include "hedgesim/crypto.hpp"

namespace hedgesim {

struct Arc {
    PartyId from;
    PartyId to;
    std::string chain;      // blockchain hosting this escrow
    std::string asset;      // asset identifier, unique per arc
    Amount value = 0;       // nominal value for payoff accounting
    Amount premium = -1;    // per-arc override of the uniform p, if >= 0
};

// Swap digraph: parties as vertices, proposed transfers as arcs, a leader
// subset that must be a feedback vertex set.
struct SwapDigraph {
    std::vector<PartyId> vertices;
    std::vector<Arc> arcs;
    std::set<PartyId> leaders;

    bool has_vertex(const PartyId& v) const;
    bool has_arc(const PartyId& u, const PartyId& v) const;
    const Arc* find_arc(const PartyId& u, const PartyId& v) const;
    std::vector<const Arc*> in_arcs(const PartyId& v) const;   // arcs (u, v)
    std::vector<const Arc*> out_arcs(const PartyId& v) const;  // arcs (v, w)
    bool is_leader(const PartyId& v) const { return leaders.count(v) > 0; }
};

// Vertex sequence (u_0,...,u_k); each (u_i, u_{i+1}) must be an arc.
// Cycle iff u_0 == u_k with distinct interior.
struct PathSeq {
    std::vector<PartyId> verts;
    bool is_cycle() const {
        return verts.size() >= 2 && verts.front() == verts.back();
    }
};

enum class PathShape { path, cycle, invalid };
PathShape classify_sequence(const SwapDigraph& g, const std::vector<PartyId>& verts);

struct LeaderValidation {
    bool ok = false;
    std::vector<PartyId> witness_cycle;  // leader-free cycle when not a FVS
};
LeaderValidation validate_leaders(const SwapDigraph& g);

bool is_strongly_connected(const SwapDigraph& g);

// Max over ordered vertex pairs of shortest path length, traversing arcs in
// the hashkey direction. Throws std::invalid_argument if not strongly
// connected.
int diameter(const SwapDigraph& g);

struct Extensions {
    std::vector<std::vector<PartyId>> paths;   // u || v || q that are paths
    std::vector<std::vector<PartyId>> cycles;  // u || v || q that close cycles
    bool closed_cycle = false;                 // v || q itself was a cycle
};
// All single-vertex extensions of v || q, per the redemption protocol's
// "if v||q is a path" step. If v||q already closes a cycle there is nothing
// to extend.
Extensions acyclic_extensions(const SwapDigraph& g,
                              const std::vector<PartyId>& q, const PartyId& v);

// Schedule-driving quantities.
//
// escrow_wait_depth: tick offset at which each party can escrow in the base
// protocol's phase one (leaders at 0, a follower one observation step after
// the last of its senders). The same cascade paces escrow premium deposits.
std::map<PartyId, int> escrow_wait_depth(const SwapDigraph& g);

// Longest simple path (vertex count) ending at a leader; bounds the
// redemption premium / hashkey cascades.
int max_premium_path_len(const SwapDigraph& g);

// All simple paths from v to any leader (used by per-arc redeem horizons).
int max_path_len_from(const SwapDigraph& g, const PartyId& v);

// Every simple path, plus cycle closures, listed by brute force. Test oracle
// helper; exponential, fine for the small digraphs under test.
std::vector<std::vector<PartyId>> all_simple_paths(const SwapDigraph& g);

}  // namespace hedgesim
