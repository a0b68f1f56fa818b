#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "satnet/linkmodel.hpp"
#include "satnet/routing.hpp"
#include "satnet/snapshots.hpp"

using namespace satnet;

namespace {

// Two-orbit polar fixture: S1..S6 on one plane (nodes 0..5), T1..T6 on the
// adjacent one (nodes 6..11). S4/T4 sit inside the polar region so their
// crossing is down; the '(S3,T3)' and '(S5,T5)' crossings are pinned to
// zeta, and the remaining crossings carry their drifted delays.
constexpr int S(int i) { return i - 1; }
constexpr int T(int i) { return 6 + i - 1; }

Graph fig4_fixture() {
    const double intra = quantize_metric(13.44);
    const double zeta = quantize_metric(8.5);
    Graph g;
    g.n = 12;
    g.adj.resize(g.n);
    for (int i = 1; i < 6; ++i) {
        g.add_undirected(S(i), S(i + 1), intra);
        g.add_undirected(T(i), T(i + 1), intra);
    }
    g.add_undirected(S(1), T(1), quantize_metric(13.9));
    g.add_undirected(S(2), T(2), quantize_metric(12.6));
    g.add_undirected(S(3), T(3), zeta);
    // no (S4, T4): inside the polar region
    g.add_undirected(S(5), T(5), zeta);
    g.add_undirected(S(6), T(6), quantize_metric(12.6));
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

// Floyd-Warshall with strict relaxation and node-index intermediate order:
// equal-cost alternatives resolve by which intermediate index comes first.
// Kept in test code as the documented counterexample the scheme avoids.
std::vector<std::vector<int>> floyd_warshall_next(const Graph& g) {
    const int n = g.n;
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInfCost));
    std::vector<std::vector<int>> next(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i) {
        dist[i][i] = 0.0;
        next[i][i] = i;
    }
    for (int u = 0; u < n; ++u)
        for (const auto& [v, w] : g.adj[u]) {
            dist[u][v] = w;
            next[u][v] = v;
        }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (dist[i][k] + dist[k][j] < dist[i][j]) {
                    dist[i][j] = dist[i][k] + dist[k][j];
                    next[i][j] = next[i][k];
                }
    return next;
}

std::vector<int> fw_path(const std::vector<std::vector<int>>& next, int s, int d) {
    std::vector<int> path = {s};
    int v = s;
    while (v != d) {
        v = next[v][d];
        path.push_back(v);
    }
    return path;
}

bool crosses(const std::vector<int>& path, int a, int b) {
    for (size_t i = 0; i + 1 < path.size(); ++i)
        if ((path[i] == a && path[i + 1] == b) || (path[i] == b && path[i + 1] == a)) return true;
    return false;
}

}  // namespace

TEST_CASE("greedy settle order splits the equal-cost pinned crossings") {
    const Graph g = fig4_fixture();
    const RouteTable table = all_pairs_routes(g);

    // The proof case: the best S3->T5 path goes through (S3,T3) and T4,
    // not through (S5,T5).
    CHECK(extract_path(table, S(3), T(5)) == std::vector<int>{S(3), T(3), T(4), T(5)});
    CHECK(table.predecessor(S(3), T(5)) == T(4));

    // End-to-end demand splits across the two pinned links.
    const auto s1t6 = extract_path(table, S(1), T(6));
    const auto s6t1 = extract_path(table, S(6), T(1));
    CHECK(crosses(s1t6, S(3), T(3)));
    CHECK_FALSE(crosses(s1t6, S(5), T(5)));
    CHECK(crosses(s6t1, S(5), T(5)));
    CHECK_FALSE(crosses(s6t1, S(3), T(3)));

    // Forward and reverse paths may differ as node sequences while their
    // costs agree exactly.
    const auto t6s1 = extract_path(table, T(6), S(1));
    CHECK(table.path_cost(S(1), T(6)) == table.path_cost(T(6), S(1)));
    CHECK(crosses(t6s1, S(5), T(5)));

    // Neither pinned link carries both directions of the fixture demand.
    CHECK(count_paths_through(table, S(3), T(3)) > 0);
    CHECK(count_paths_through(table, S(5), T(5)) > 0);
}

TEST_CASE("floyd-warshall concentrates both directions onto one pinned link") {
    const Graph g = fig4_fixture();
    const RouteTable dijkstra = all_pairs_routes(g);
    const auto next = floyd_warshall_next(g);

    const auto fw_fwd = fw_path(next, S(3), T(5));
    const auto fw_rev = fw_path(next, T(5), S(3));
    const bool fw_both_s5 = crosses(fw_fwd, S(5), T(5)) && crosses(fw_rev, S(5), T(5));
    const bool fw_both_s3 = crosses(fw_fwd, S(3), T(3)) && crosses(fw_rev, S(3), T(3));
    CHECK((fw_both_s5 || fw_both_s3));  // one link ends up with both directions

    const auto dj_fwd = extract_path(dijkstra, S(3), T(5));
    const auto dj_rev = extract_path(dijkstra, T(5), S(3));
    CHECK(crosses(dj_fwd, S(3), T(3)));
    CHECK(crosses(dj_rev, S(5), T(5)));  // split, unlike floyd-warshall
}

TEST_CASE("identity and diff basics") {
    const Graph g = fig4_fixture();
    const RouteTable table = all_pairs_routes(g);
    CHECK(extract_path(table, S(2), S(2)) == std::vector<int>{S(2)});
    CHECK(table.path_cost(S(2), S(2)) == 0.0);

    const RouteDiff self = diff_routes(table, table);
    CHECK(self.changed_paths == 0);
    CHECK(self.affected_satellites.empty());

    RouteTable other = table;
    other.n = 11;
    CHECK_THROWS_AS(diff_routes(table, other), std::invalid_argument);

    CHECK(count_paths_through(table, S(4), T(4)) == 0);  // absent link
}

TEST_CASE("tables are bit-identical across reruns") {
    ConstellationConfig cfg;
    const WeightedTopology topo = llar_weights(cfg, 321.0, MetricParams{});
    const RouteTable a = all_pairs_routes(cfg, topo);
    const RouteTable b = all_pairs_routes(cfg, llar_weights(cfg, 321.0, MetricParams{}));
    CHECK(a.pred == b.pred);
    CHECK(a.cost == b.cost);
    CHECK(a.next_hop == b.next_hop);
}

TEST_CASE("random graphs match a bellman-ford oracle exactly") {
    std::mt19937_64 rng(424242);
    const auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    };
    for (int trial = 0; trial < 100; ++trial) {
        Graph g;
        g.n = 20;
        g.adj.resize(g.n);
        for (int u = 0; u < g.n; ++u)
            for (int v = u + 1; v < g.n; ++v)
                if (uniform(0, 1) < 0.3) g.add_undirected(u, v, uniform(0.1, 10.0));
        for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());

        for (int s = 0; s < g.n; ++s) {
            std::vector<double> cost;
            std::vector<int> pred;
            shortest_path_tree(g, s, cost, pred);
            // independent relaxation-to-fixpoint oracle
            std::vector<double> oracle(g.n, kInfCost);
            oracle[s] = 0.0;
            bool changed = true;
            while (changed) {
                changed = false;
                for (int u = 0; u < g.n; ++u) {
                    if (!std::isfinite(oracle[u])) continue;
                    for (const auto& [v, w] : g.adj[u])
                        if (oracle[u] + w < oracle[v]) {
                            oracle[v] = oracle[u] + w;
                            changed = true;
                        }
                }
            }
            for (int v = 0; v < g.n; ++v) CHECK(cost[v] == oracle[v]);
        }
    }
}

TEST_CASE("the constellation never partitions under seam and polar drops") {
    ConstellationConfig cfg;
    for (double t : {0.0, 500.0, 1750.0, 3000.0, 5200.0}) {
        const RouteTable table = all_pairs_routes(cfg, raw_delay_weights(cfg, t));
        for (int s = 0; s < table.n; ++s)
            for (int d = 0; d < table.n; ++d) REQUIRE(std::isfinite(table.path_cost(s, d)));
    }
}

TEST_CASE("all-pairs costs are symmetric in value") {
    ConstellationConfig cfg;
    const RouteTable table = all_pairs_routes(cfg, llar_weights(cfg, 808.0, MetricParams{}));
    for (int s = 0; s < table.n; ++s)
        for (int d = s + 1; d < table.n; ++d)
            CHECK(table.path_cost(s, d) == table.path_cost(d, s));
}

TEST_CASE("pinned-metric routes hold still inside a connected arc") {
    // Until the nearly-disconnecting link actually drops, the fixture
    // demand keeps its paths; the raw metric flips them mid-arc.
    ConstellationConfig cfg;
    const MetricParams params;
    const LinkEvent* rev = nullptr;
    const auto events = connectivity_events(cfg);
    for (const auto& ev : events)
        if (ev.kind == LinkEventKind::Reconnect) {
            rev = &ev;
            break;
        }
    REQUIRE(rev != nullptr);
    const int S_count = cfg.sats_per_plane;
    const int p = rev->link.endpoint_a.plane;
    const int k = rev->link.endpoint_a.slot;
    const int src = node_index(cfg, {p, ((k - 4) % S_count + S_count) % S_count});
    const int dst = node_index(cfg, {(p + 1) % cfg.num_planes, (k + 1) % S_count});

    std::vector<int> reference;
    for (double dt : {1.0, 40.0, 80.0, 120.0, 160.0}) {  // the drop is ~162.7 s after
        const RouteTable table =
            all_pairs_routes(cfg, llar_weights(cfg, rev->time + dt, params));
        const auto path = extract_path(table, src, dst);
        if (reference.empty())
            reference = path;
        else
            CHECK(path == reference);
    }
}

TEST_CASE("route table csv") {
    const Graph g = fig4_fixture();
    const RouteTable table = all_pairs_routes(g);
    const std::string csv =
        route_table_csv(table, [](int v) { return std::to_string(v); });
    CHECK(csv.rfind("source,destination,cost_ms,path\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 12 * 12);
}
