#include "hedgesim/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

namespace hedgesim {

bool SwapDigraph::has_vertex(const PartyId& v) const {
    return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
}

bool SwapDigraph::has_arc(const PartyId& u, const PartyId& v) const {
    return find_arc(u, v) != nullptr;
}

const Arc* SwapDigraph::find_arc(const PartyId& u, const PartyId& v) const {
    for (const auto& a : arcs)
        if (a.from == u && a.to == v) return &a;
    return nullptr;
}

std::vector<const Arc*> SwapDigraph::in_arcs(const PartyId& v) const {
    std::vector<const Arc*> out;
    for (const auto& a : arcs)
        if (a.to == v) out.push_back(&a);
    return out;
}

std::vector<const Arc*> SwapDigraph::out_arcs(const PartyId& v) const {
    std::vector<const Arc*> out;
    for (const auto& a : arcs)
        if (a.from == v) out.push_back(&a);
    return out;
}

PathShape classify_sequence(const SwapDigraph& g, const std::vector<PartyId>& verts) {
    if (verts.empty()) return PathShape::invalid;
    for (const auto& v : verts)
        if (!g.has_vertex(v)) return PathShape::invalid;
    for (size_t i = 0; i + 1 < verts.size(); ++i)
        if (!g.has_arc(verts[i], verts[i + 1])) return PathShape::invalid;
    bool cycle = verts.size() >= 2 && verts.front() == verts.back();
    size_t distinct_span = cycle ? verts.size() - 1 : verts.size();
    for (size_t i = 0; i < distinct_span; ++i)
        for (size_t j = i + 1; j < distinct_span; ++j)
            if (verts[i] == verts[j]) return PathShape::invalid;
    return cycle ? PathShape::cycle : PathShape::path;
}

namespace {

// DFS cycle search over the subgraph induced by `allowed`.
std::optional<std::vector<PartyId>> find_cycle(const SwapDigraph& g,
                                               const std::set<PartyId>& allowed) {
    std::map<PartyId, int> color;  // 0 white, 1 gray, 2 black
    std::vector<PartyId> stack;
    std::optional<std::vector<PartyId>> found;

    std::function<bool(const PartyId&)> dfs = [&](const PartyId& v) -> bool {
        color[v] = 1;
        stack.push_back(v);
        for (const Arc* a : g.out_arcs(v)) {
            if (!allowed.count(a->to)) continue;
            if (color[a->to] == 1) {
                auto it = std::find(stack.begin(), stack.end(), a->to);
                std::vector<PartyId> cyc(it, stack.end());
                cyc.push_back(a->to);
                found = cyc;
                return true;
            }
            if (color[a->to] == 0 && dfs(a->to)) return true;
        }
        stack.pop_back();
        color[v] = 2;
        return false;
    };

    for (const auto& v : g.vertices)
        if (allowed.count(v) && color[v] == 0 && dfs(v)) break;
    return found;
}

}  // namespace

LeaderValidation validate_leaders(const SwapDigraph& g) {
    LeaderValidation res;
    std::set<PartyId> followers;
    for (const auto& v : g.vertices)
        if (!g.is_leader(v)) followers.insert(v);
    auto cyc = find_cycle(g, followers);
    if (cyc) {
        res.witness_cycle = *cyc;
        return res;
    }
    res.ok = true;
    return res;
}

namespace {

std::map<PartyId, int> bfs_dist(const SwapDigraph& g, const PartyId& src) {
    std::map<PartyId, int> dist;
    std::deque<PartyId> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        PartyId v = q.front();
        q.pop_front();
        for (const Arc* a : g.out_arcs(v)) {
            if (!dist.count(a->to)) {
                dist[a->to] = dist[v] + 1;
                q.push_back(a->to);
            }
        }
    }
    return dist;
}

}  // namespace

bool is_strongly_connected(const SwapDigraph& g) {
    if (g.vertices.empty()) return false;
    for (const auto& v : g.vertices)
        if (bfs_dist(g, v).size() != g.vertices.size()) return false;
    return true;
}

int diameter(const SwapDigraph& g) {
    if (!is_strongly_connected(g))
        throw std::invalid_argument("diameter: digraph not strongly connected");
    int d = 0;
    for (const auto& v : g.vertices)
        for (const auto& [_, dist] : bfs_dist(g, v)) d = std::max(d, dist);
    return d;
}

Extensions acyclic_extensions(const SwapDigraph& g,
                              const std::vector<PartyId>& q, const PartyId& v) {
    Extensions ext;
    std::vector<PartyId> vq;
    vq.push_back(v);
    vq.insert(vq.end(), q.begin(), q.end());
    PathShape base = classify_sequence(g, vq);
    if (base == PathShape::cycle) {
        ext.closed_cycle = true;
        return ext;
    }
    if (base != PathShape::path) return ext;
    for (const Arc* a : g.in_arcs(v)) {
        std::vector<PartyId> cand;
        cand.push_back(a->from);
        cand.insert(cand.end(), vq.begin(), vq.end());
        switch (classify_sequence(g, cand)) {
            case PathShape::path: ext.paths.push_back(cand); break;
            case PathShape::cycle: ext.cycles.push_back(cand); break;
            case PathShape::invalid: break;
        }
    }
    return ext;
}

std::map<PartyId, int> escrow_wait_depth(const SwapDigraph& g) {
    std::map<PartyId, int> depth;
    for (const auto& v : g.vertices) depth[v] = g.is_leader(v) ? 0 : -1;
    // Followers wait for all incoming escrows; leaders move first. The
    // follower subgraph is acyclic when leaders form a FVS, so this settles
    // within |V| sweeps.
    for (size_t round = 0; round < g.vertices.size(); ++round) {
        bool changed = false;
        for (const auto& v : g.vertices) {
            if (g.is_leader(v) || depth[v] >= 0) continue;
            int mx = 0;
            bool ready = true;
            for (const Arc* a : g.in_arcs(v)) {
                if (depth[a->from] < 0) { ready = false; break; }
                mx = std::max(mx, depth[a->from]);
            }
            if (ready) {
                depth[v] = mx + 1;
                changed = true;
            }
        }
        if (!changed) break;
    }
    for (auto& [v, d] : depth)
        if (d < 0) throw std::invalid_argument("escrow_wait_depth: leaders not a FVS");
    return depth;
}

namespace {

void dfs_paths(const SwapDigraph& g, std::vector<PartyId>& cur,
               std::vector<std::vector<PartyId>>& out) {
    out.push_back(cur);
    const PartyId& head = cur.front();
    for (const Arc* a : g.in_arcs(head)) {
        bool repeat = false;
        for (const auto& v : cur)
            if (v == a->from) { repeat = true; break; }
        if (repeat) continue;
        cur.insert(cur.begin(), a->from);
        dfs_paths(g, cur, out);
        cur.erase(cur.begin());
    }
}

}  // namespace

int max_premium_path_len(const SwapDigraph& g) {
    int mx = 0;
    for (const auto& l : g.leaders) {
        std::vector<PartyId> cur{l};
        std::vector<std::vector<PartyId>> paths;
        dfs_paths(g, cur, paths);
        for (const auto& p : paths) mx = std::max<int>(mx, int(p.size()));
    }
    return mx;
}

int max_path_len_from(const SwapDigraph& g, const PartyId& v) {
    // longest simple path v -> ... -> leader, by forward DFS
    int mx = 0;
    std::vector<PartyId> cur{v};
    std::function<void()> dfs = [&]() {
        if (g.is_leader(cur.back())) mx = std::max<int>(mx, int(cur.size()));
        for (const Arc* a : g.out_arcs(cur.back())) {
            if (std::find(cur.begin(), cur.end(), a->to) != cur.end()) continue;
            cur.push_back(a->to);
            dfs();
            cur.pop_back();
        }
    };
    dfs();
    return mx;
}

std::vector<std::vector<PartyId>> all_simple_paths(const SwapDigraph& g) {
    std::vector<std::vector<PartyId>> out;
    for (const auto& v : g.vertices) {
        std::vector<PartyId> cur{v};
        dfs_paths(g, cur, out);
    }
    return out;
}

}  // namespace hedgesim
