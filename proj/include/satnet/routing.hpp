#pragma once

// Shortest-path machinery: strict-relaxation Dijkstra trees, all-pairs
// route tables, and diffs between tables (changed paths / affected nodes).
//
// Relaxation is strict on purpose: a candidate with cost equal to the
// current tentative cost never displaces the settled predecessor. Combined
// with the (cost, node-index) priority order this makes every table a pure
// function of the weighted graph, and it is what splits equal-cost demand
// across the two pinned-metric links instead of piling it onto one.

#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "satnet/constellation.hpp"
#include "satnet/linkmodel.hpp"

namespace satnet {

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

struct Graph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;  // neighbor index, weight

    void add_undirected(int u, int v, double w) {
        adj[u].push_back({v, w});
        adj[v].push_back({u, w});
    }
};

inline Graph graph_from_topology(const ConstellationConfig& cfg, const WeightedTopology& topo) {
    Graph g;
    g.n = cfg.total_satellites();
    g.adj.resize(g.n);
    for (const auto& [link, w] : topo.metric)
        g.add_undirected(node_index(cfg, link.endpoint_a), node_index(cfg, link.endpoint_b), w);
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

// One shortest-path tree. Ties among equal tentative costs are broken by
// settling the smaller node index first; equal-cost relaxations never
// update an already-assigned predecessor.
inline void shortest_path_tree(const Graph& g, int source, std::vector<double>& cost,
                               std::vector<int>& pred) {
    cost.assign(g.n, kInfCost);
    pred.assign(g.n, -1);
    cost[source] = 0.0;
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    queue.push({0.0, source});
    std::vector<char> settled(g.n, 0);
    while (!queue.empty()) {
        const auto [c, u] = queue.top();
        queue.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        for (const auto& [v, w] : g.adj[u]) {
            if (settled[v]) continue;
            const double cand = c + w;
            if (cand < cost[v]) {  // strict relaxation only
                cost[v] = cand;
                pred[v] = u;
                queue.push({cand, v});
            }
        }
    }
}

struct RouteTable {
    double topology_timestamp = 0.0;
    int n = 0;
    std::vector<int16_t> pred;     // pred[s*n+v]; -1 = none (source or unreachable)
    std::vector<double> cost;      // cost[s*n+v]; +inf = unreachable
    std::vector<int16_t> next_hop; // next_hop[s*n+d]; -1 = none

    int predecessor(int s, int v) const { return pred[static_cast<size_t>(s) * n + v]; }
    double path_cost(int s, int v) const { return cost[static_cast<size_t>(s) * n + v]; }
    int first_hop(int s, int d) const { return next_hop[static_cast<size_t>(s) * n + d]; }
};

inline RouteTable all_pairs_routes(const Graph& g, double timestamp = 0.0) {
    RouteTable table;
    table.topology_timestamp = timestamp;
    table.n = g.n;
    table.pred.assign(static_cast<size_t>(g.n) * g.n, -1);
    table.cost.assign(static_cast<size_t>(g.n) * g.n, kInfCost);
    table.next_hop.assign(static_cast<size_t>(g.n) * g.n, -1);
    std::vector<double> cost;
    std::vector<int> pred;
    for (int s = 0; s < g.n; ++s) {
        shortest_path_tree(g, s, cost, pred);
        for (int v = 0; v < g.n; ++v) {
            table.pred[static_cast<size_t>(s) * g.n + v] = static_cast<int16_t>(pred[v]);
            table.cost[static_cast<size_t>(s) * g.n + v] = cost[v];
        }
        for (int d = 0; d < g.n; ++d) {
            if (d == s || pred[d] < 0) continue;
            int v = d;
            while (pred[v] != s) v = pred[v];
            table.next_hop[static_cast<size_t>(s) * g.n + d] = static_cast<int16_t>(v);
        }
    }
    return table;
}

inline RouteTable all_pairs_routes(const ConstellationConfig& cfg, const WeightedTopology& topo) {
    return all_pairs_routes(graph_from_topology(cfg, topo), topo.timestamp);
}

// Node sequence from s to d (inclusive); {s} when s == d; empty when
// unreachable.
inline std::vector<int> extract_path(const RouteTable& table, int s, int d) {
    if (s == d) return {s};
    std::vector<int> rev;
    int v = d;
    while (v != s) {
        rev.push_back(v);
        v = table.predecessor(s, v);
        if (v < 0) return {};
    }
    rev.push_back(s);
    return {rev.rbegin(), rev.rend()};
}

struct RouteDiff {
    int changed_paths = 0;
    std::set<int> affected_satellites;  // node indices whose next-hop map changed
};

namespace detail {

// Compare the s->d node sequences of two tables without materializing them.
inline bool same_path(const RouteTable& a, const RouteTable& b, int s, int d) {
    int va = d, vb = d;
    while (true) {
        if (va != vb) return false;
        if (va == s) return true;
        va = va < 0 ? -2 : a.predecessor(s, va);
        vb = vb < 0 ? -2 : b.predecessor(s, vb);
        if (va == -2 && vb == -2) return true;  // both unreachable
    }
}

}  // namespace detail

inline RouteDiff diff_routes(const RouteTable& old_table, const RouteTable& new_table) {
    if (old_table.n != new_table.n)
        throw std::invalid_argument("diff_routes: tables cover different node sets");
    RouteDiff diff;
    const int n = old_table.n;
    for (int s = 0; s < n; ++s) {
        bool hop_changed = false;
        for (int d = 0; d < n; ++d) {
            if (s == d) continue;
            if (old_table.first_hop(s, d) != new_table.first_hop(s, d)) hop_changed = true;
            if (!detail::same_path(old_table, new_table, s, d)) ++diff.changed_paths;
        }
        if (hop_changed) diff.affected_satellites.insert(s);
    }
    return diff;
}

// Number of ordered (s, d) paths traversing the edge u-v in either direction.
inline int count_paths_through(const RouteTable& table, int u, int v) {
    int count = 0;
    for (int s = 0; s < table.n; ++s)
        for (int d = 0; d < table.n; ++d) {
            if (s == d) continue;
            int x = d;
            while (x != s && x >= 0) {
                const int p = table.predecessor(s, x);
                if ((x == u && p == v) || (x == v && p == u)) {
                    ++count;
                    break;
                }
                x = p;
            }
        }
    return count;
}

inline int count_paths_through(const ConstellationConfig& cfg, const RouteTable& table,
                               const LinkId& link) {
    return count_paths_through(table, node_index(cfg, link.endpoint_a),
                               node_index(cfg, link.endpoint_b));
}

// Traversal counts for every edge in one pass; key = (min, max) node index.
inline std::map<std::pair<int, int>, int> link_path_counts(const RouteTable& table) {
    std::map<std::pair<int, int>, int> counts;
    for (int s = 0; s < table.n; ++s)
        for (int d = 0; d < table.n; ++d) {
            if (s == d) continue;
            int x = d;
            while (x != s) {
                const int p = table.predecessor(s, x);
                if (p < 0) break;
                ++counts[{std::min(x, p), std::max(x, p)}];
                x = p;
            }
        }
    return counts;
}

inline std::string route_table_csv(const RouteTable& table,
                                   const std::function<std::string(int)>& node_name) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "source,destination,cost_ms,path\n";
    for (int s = 0; s < table.n; ++s)
        for (int d = 0; d < table.n; ++d) {
            out << node_name(s) << ',' << node_name(d) << ',';
            const double c = table.path_cost(s, d);
            if (std::isfinite(c))
                out << c;
            else
                out << "inf";
            out << ',';
            const auto path = extract_path(table, s, d);
            for (size_t i = 0; i < path.size(); ++i) {
                if (i) out << '/';
                out << node_name(path[i]);
            }
            out << '\n';
        }
    return out.str();
}

}  // namespace satnet
