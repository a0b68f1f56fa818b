#pragma once

// Flow-level traffic evaluation. A seeded population of ground users is
// paired up and routed over the scheduled route tables; links are fluid
// pipes with a fixed capacity. Per step, a flow follows the current
// segment's frozen path between its endpoints' nearest satellites; links
// carry the sum of nominal flow rates, overloaded links shed the excess
// proportionally, and a flow whose frozen path crosses a link that has
// physically dropped mid-segment loses everything until the next update.

#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "satnet/constellation.hpp"
#include "satnet/linkmodel.hpp"
#include "satnet/routing.hpp"
#include "satnet/snapshots.hpp"

namespace satnet {

struct TrafficScenario {
    int num_users = 100;
    double rate_min = 1.0;       // Mb/s
    double rate_max = 1.5;       // Mb/s
    int packet_length = 1000;    // bytes, reporting only
    double link_capacity = 12.0; // Mb/s per direction
    double duration = 900.0;     // s
    double step = 5.0;           // s
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (num_users <= 0) throw ConfigError("num_users must be positive");
        if (num_users % 2 != 0) throw ConfigError("num_users must be even (users are paired)");
        if (!(rate_min <= rate_max)) throw ConfigError("rate_range must satisfy min <= max");
        if (!(rate_min >= 0.0)) throw ConfigError("rates must be non-negative");
        if (!(link_capacity > 0.0)) throw ConfigError("link_capacity must be positive");
        if (!(duration > 0.0)) throw ConfigError("duration must be positive");
        if (!(step > 0.0)) throw ConfigError("step must be positive");
        if (packet_length <= 0) throw ConfigError("packet_length must be positive");
    }
};

struct User {
    GeoPosition position;  // on the Earth surface
    int peer = -1;
    double rate = 0.0;  // Mb/s sent toward peer
};

namespace detail {

// Fixed-width draws so user populations are reproducible across platforms.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_index(std::mt19937_64& rng, int bound) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(bound));
}

}  // namespace detail

// Uniform positions on the sphere, a random perfect matching into
// bidirectional pairs, and uniform per-user rates; fully determined by the
// seed. Draw order: positions, then the pairing shuffle, then rates.
inline std::vector<User> generate_users(const TrafficScenario& scenario) {
    scenario.validate();
    std::mt19937_64 rng(scenario.rng_seed);
    std::vector<User> users(scenario.num_users);
    for (auto& u : users) {
        const double z = 2.0 * detail::uniform01(rng) - 1.0;
        u.position.latitude = std::asin(std::clamp(z, -1.0, 1.0)) * 180.0 / M_PI;
        u.position.longitude = -180.0 + 360.0 * detail::uniform01(rng);
        u.position.radius = kEarthRadiusKm;
    }
    std::vector<int> order(users.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[detail::uniform_index(rng, i + 1)]);
    for (size_t k = 0; k + 1 < order.size(); k += 2) {
        users[order[k]].peer = order[k + 1];
        users[order[k + 1]].peer = order[k];
    }
    for (auto& u : users) u.rate = detail::uniform(rng, scenario.rate_min, scenario.rate_max);
    return users;
}

// Nearest satellite (greatest-circle) per user at time t; ties go to the
// lowest node index.
inline std::vector<int> attach_users(const ConstellationConfig& cfg,
                                     const std::vector<User>& users, double t) {
    const int n = cfg.total_satellites();
    std::vector<Vec3> sat_dirs(n);
    for (int i = 0; i < n; ++i) {
        const Vec3 p = satellite_cartesian(cfg, node_from_index(cfg, i), t);
        const double r = cfg.orbit_radius_km();
        sat_dirs[i] = Vec3{p.x / r, p.y / r, p.z / r};
    }
    std::vector<int> attach(users.size(), -1);
    for (size_t u = 0; u < users.size(); ++u) {
        const Vec3 dir = unit_vector(users[u].position);
        double best = -2.0;
        for (int i = 0; i < n; ++i) {
            const double d = dot(dir, sat_dirs[i]);
            if (d > best) {
                best = d;
                attach[u] = i;
            }
        }
    }
    return attach;
}

struct TrafficStep {
    double time = 0.0;
    double loss_rate = 0.0;        // lost / offered
    double max_utilization = 0.0;  // max over links of min(load, cap) / cap
};

struct TrafficReport {
    std::vector<TrafficStep> steps;
    double mean_loss = 0.0;
    double peak_max_utilization = 0.0;
    double mean_max_utilization = 0.0;
    double offered_mb = 0.0;  // traffic volume over the run
    double lost_mb = 0.0;
    double lost_packets = 0.0;  // lost_mb expressed in packets
};

inline TrafficReport evaluate(const ConstellationConfig& cfg, const SnapshotPlan& plan,
                              const std::vector<RouteTable>& tables,
                              const TrafficScenario& scenario, double step = 5.0) {
    scenario.validate();
    if (static_cast<int>(tables.size()) != plan.update_count())
        throw ConfigError("evaluate: one route table per plan segment required");
    if (scenario.duration > plan.period + 1e-9)
        throw ConfigError("evaluate: plan does not cover the traffic duration");
    const auto users = generate_users(scenario);
    const int n = cfg.total_satellites();

    TrafficReport report;
    for (double t = 0.0; t < scenario.duration - 1e-9; t += step) {
        const double dt = std::min(step, scenario.duration - t);  // last step may be partial
        const RouteTable& table = tables[plan.segment_index_at(t)];
        const auto attach = attach_users(cfg, users, t);

        // Offered load per directed channel (duplex ISLs: each direction
        // carries link_capacity on its own).
        const auto edge_key = [n](int a, int b) {
            return static_cast<size_t>(a) * n + b;
        };
        std::vector<double> load(static_cast<size_t>(n) * n, 0.0);
        std::vector<std::vector<int>> paths(users.size());
        for (size_t u = 0; u < users.size(); ++u) {
            const int src = attach[u];
            const int dst = attach[users[u].peer];
            if (src == dst) continue;
            paths[u] = extract_path(table, src, dst);
            if (paths[u].empty())
                throw ConfigError("evaluate: flow endpoints unreachable in frozen table");
            for (size_t h = 0; h + 1 < paths[u].size(); ++h)
                load[edge_key(paths[u][h], paths[u][h + 1])] += users[u].rate;
        }

        // Physical link state during this step (frozen paths may cross links
        // that have dropped since the segment started).
        std::vector<char> down(static_cast<size_t>(n) * n, 0);
        for (const auto& link : inter_orbit_links(cfg)) {
            if (link_connected(cfg, link, t)) continue;
            const int u = node_index(cfg, link.endpoint_a);
            const int v = node_index(cfg, link.endpoint_b);
            down[static_cast<size_t>(u) * n + v] = down[static_cast<size_t>(v) * n + u] = 1;
        }

        TrafficStep st;
        st.time = t;
        double offered = 0.0, delivered = 0.0;
        for (size_t u = 0; u < users.size(); ++u) {
            const double rate = users[u].rate;
            offered += rate;
            if (paths[u].empty()) {  // attached to the same satellite as peer
                delivered += rate;
                continue;
            }
            double through = 1.0;
            for (size_t h = 0; h + 1 < paths[u].size() && through > 0.0; ++h) {
                if (down[static_cast<size_t>(paths[u][h]) * n + paths[u][h + 1]]) {
                    through = 0.0;
                    break;
                }
                const double l = load[edge_key(paths[u][h], paths[u][h + 1])];
                if (l > scenario.link_capacity) through *= scenario.link_capacity / l;
            }
            delivered += rate * through;
        }
        for (size_t i = 0; i < load.size(); ++i)
            if (load[i] > 0.0)
                st.max_utilization = std::max(
                    st.max_utilization, std::min(load[i], scenario.link_capacity) /
                                            scenario.link_capacity);
        st.loss_rate = offered > 0.0 ? (offered - delivered) / offered : 0.0;
        report.steps.push_back(st);
        const double mb = offered * dt;  // Mb offered this step
        report.offered_mb += mb;
        report.lost_mb += st.loss_rate * mb;
    }

    for (const auto& st : report.steps) {
        report.mean_loss += st.loss_rate;
        report.mean_max_utilization += st.max_utilization;
        report.peak_max_utilization = std::max(report.peak_max_utilization, st.max_utilization);
    }
    if (!report.steps.empty()) {
        report.mean_loss /= report.steps.size();
        report.mean_max_utilization /= report.steps.size();
    }
    report.lost_packets = report.lost_mb * 1e6 / (8.0 * scenario.packet_length);
    return report;
}

inline std::string traffic_csv(const TrafficReport& report) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "step_s,loss_rate,max_utilization\n";
    for (const auto& st : report.steps)
        out << st.time << ',' << st.loss_rate << ',' << st.max_utilization << '\n';
    return out.str();
}

inline TrafficScenario traffic_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {"num_users",     "rate_range", "packet_length",
                                                   "link_capacity", "duration",   "rng_seed",
                                                   "step"};
    if (!j.is_object()) throw ConfigError("traffic section must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown traffic config key: \"" + key + "\"");
    }
    TrafficScenario s;
    if (j.contains("num_users")) s.num_users = j.at("num_users").get<int>();
    if (j.contains("rate_range")) {
        const auto& r = j.at("rate_range");
        if (!r.is_array() || r.size() != 2) throw ConfigError("rate_range must be [min, max]");
        s.rate_min = r[0].get<double>();
        s.rate_max = r[1].get<double>();
    }
    if (j.contains("packet_length")) s.packet_length = j.at("packet_length").get<int>();
    if (j.contains("link_capacity")) s.link_capacity = j.at("link_capacity").get<double>();
    if (j.contains("duration")) s.duration = j.at("duration").get<double>();
    if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (j.contains("step")) s.step = j.at("step").get<double>();
    s.validate();
    return s;
}

}  // namespace satnet
