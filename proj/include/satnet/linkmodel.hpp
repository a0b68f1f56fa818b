#pragma once

// Per-link propagation delay, link lifetime, and the lifetime-assisted
// metric that turns an instantaneous topology into a weighted graph.
//
// The metric function is deliberately simple: every connected link carries
// its propagation delay, except that in every adjacent-plane pair the
// inter-orbit link with the largest remaining lifetime and the one with the
// smallest positive lifetime (per polar region the pair interacts with) are
// pinned to the constant zeta. Pinning both extremes removes the relative
// metric variation that makes shortest paths oscillate near the poles.

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include "satnet/constellation.hpp"

namespace satnet {

inline constexpr double kInfDelay = std::numeric_limits<double>::infinity();

struct LinkState {
    LinkId link;
    bool connected = false;
    double delay = kInfDelay;  // ms, propagation only; infinite when disconnected
    double lifetime = 0.0;     // s until next disconnect; 0 while down; inf for intra-orbit
};

struct MetricParams {
    double zeta = 8.5;  // ms
};

struct WeightedTopology {
    double timestamp = 0.0;
    std::map<LinkId, LinkState> links;
    std::map<LinkId, double> metric;  // connected links only
    std::set<LinkId> zeta_links;
};

// Metric weights are snapped to a 2^-30 ms grid (~1e-9 ms, far below any
// physical significance) so that every path sum fits exactly in double
// precision: route tables become pure functions of the weight vector,
// equal-cost ties are exact rather than rounding noise, and oracle
// cross-checks can demand bit equality.
inline double quantize_metric(double ms) {
    return std::ldexp(std::round(std::ldexp(ms, 30)), -30);
}

// Chord distance over light speed, in milliseconds. Defined for any valid
// link regardless of connection state; the topology layer substitutes
// infinity for disconnected links.
inline double propagation_delay(const ConstellationConfig& cfg, const LinkId& link, double t) {
    const Vec3 a = satellite_cartesian(cfg, link.endpoint_a, t);
    const Vec3 b = satellite_cartesian(cfg, link.endpoint_b, t);
    return distance(a, b) / kLightSpeedKmPerS * 1000.0;
}

inline double intra_orbit_delay(const ConstellationConfig& cfg) {
    const double chord = 2.0 * cfg.orbit_radius_km() * std::sin(M_PI / cfg.sats_per_plane);
    return chord / kLightSpeedKmPerS * 1000.0;
}

// Time until the link's next disconnection; zero while disconnected,
// infinite for intra-orbit links (they never drop).
inline double link_lifetime(const ConstellationConfig& cfg, const LinkId& link, double t) {
    if (link.kind == LinkKind::IntraOrbit) return std::numeric_limits<double>::infinity();
    if (!link_connected(cfg, link, t)) return 0.0;
    const auto arcs = detail::polar_blackout_arcs(cfg, link);
    const double u = detail::orbit_phase_deg(cfg, link.endpoint_a, t);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& arc : arcs)
        best = std::min(best, detail::wrap360(arc.start - u) / cfg.angular_rate_deg_per_s());
    return best;
}

// Smallest propagation delay an inter-orbit link ever has while connected
// (attained at the disconnect/reconnect instants).
inline double min_connected_inter_orbit_delay(const ConstellationConfig& cfg) {
    const auto inter = inter_orbit_links(cfg);
    if (inter.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    const LinkId& link = inter.front();
    const double rate = cfg.angular_rate_deg_per_s();
    const double u0 = detail::orbit_phase_deg(cfg, link.endpoint_a, 0.0);
    const auto arcs = detail::polar_blackout_arcs(cfg, link);
    double down = 0.0;
    for (const auto& a : arcs) down += a.length;
    if (down >= 360.0 - 1e-9) return std::numeric_limits<double>::infinity();
    for (const auto& arc : arcs) {
        for (double phase : {arc.start, arc.start + arc.length}) {
            const double t = detail::wrap360(phase - u0) / rate;
            best = std::min(best, propagation_delay(cfg, link, t));
        }
    }
    return best;
}

// Delay of an inter-orbit link at the instant it inherits the
// nearly-disconnecting role, i.e. one slot cycle before its own drop (the
// previous link of the pair drops then). This is the upper feasibility
// bound for zeta: below it, the pinned links stay the cheapest crossings
// for their whole tenure.
inline double nearly_disconnecting_onset_delay(const ConstellationConfig& cfg) {
    const auto inter = inter_orbit_links(cfg);
    if (inter.empty()) return std::numeric_limits<double>::infinity();
    const LinkId& link = inter.front();
    const double rate = cfg.angular_rate_deg_per_s();
    const double u0 = detail::orbit_phase_deg(cfg, link.endpoint_a, 0.0);
    const auto arcs = detail::polar_blackout_arcs(cfg, link);
    double down = 0.0;
    for (const auto& a : arcs) down += a.length;
    if (down >= 360.0 - 1e-9) return std::numeric_limits<double>::infinity();
    const double slot_cycle = cfg.system_period / cfg.sats_per_plane;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& arc : arcs) {
        const double t_drop = detail::wrap360(arc.start - u0) / rate;
        best = std::min(best,
                        propagation_delay(cfg, link, t_drop - slot_cycle + cfg.system_period));
    }
    return best;
}

// Raised when zeta violates its feasibility bounds for a given geometry.
class ZetaError : public ConfigError {
public:
    explicit ZetaError(const std::string& what) : ConfigError(what) {}
};

inline void validate_metric_params(const ConstellationConfig& cfg, const MetricParams& params) {
    const double onset = nearly_disconnecting_onset_delay(cfg);
    const double intra = intra_orbit_delay(cfg);
    if (!(params.zeta > 0.0))
        throw ZetaError("zeta must be positive");
    if (!(params.zeta < onset))
        throw ZetaError("zeta (" + std::to_string(params.zeta) +
                        " ms) must be below the delay at which a link becomes "
                        "nearly-disconnecting (" + std::to_string(onset) + " ms)");
    if (!(params.zeta < intra))
        throw ZetaError("zeta (" + std::to_string(params.zeta) +
                        " ms) must be below the intra-orbit delay (" + std::to_string(intra) +
                        " ms)");
}

namespace detail {

enum class PolarRegion { North, South };

// Which polar region the link will hit at its next disconnection.
inline PolarRegion next_disconnect_region(const ConstellationConfig& cfg, const LinkId& link,
                                          double t, double lifetime) {
    const double td = t + lifetime;
    const GeoPosition pa = satellite_position(cfg, link.endpoint_a, td);
    const GeoPosition pb = satellite_position(cfg, link.endpoint_b, td);
    const double lat = std::abs(pa.latitude) >= std::abs(pb.latitude) ? pa.latitude : pb.latitude;
    return lat >= 0.0 ? PolarRegion::North : PolarRegion::South;
}

}  // namespace detail

// Weighted topology with every connected link carrying its propagation
// delay (no lifetime pinning). This is the baseline metric.
inline WeightedTopology raw_delay_weights(const ConstellationConfig& cfg, double t) {
    WeightedTopology topo;
    topo.timestamp = t;
    for (const auto& link : all_links(cfg)) {
        LinkState st;
        st.link = link;
        st.connected = link_connected(cfg, link, t);
        st.delay = st.connected ? propagation_delay(cfg, link, t) : kInfDelay;
        st.lifetime = link_lifetime(cfg, link, t);
        if (st.connected) topo.metric[link] = quantize_metric(st.delay);
        topo.links[link] = st;
    }
    return topo;
}

inline WeightedTopology llar_weights(const ConstellationConfig& cfg, double t,
                                     const MetricParams& params) {
    validate_metric_params(cfg, params);
    WeightedTopology topo = raw_delay_weights(cfg, t);

    // Per plane pair and per polar region the pair's links are heading to,
    // pin the extreme-lifetime links to zeta. Ties pin every link attaining
    // the extreme.
    for (const auto& [pa, pb] : inter_orbit_plane_pairs(cfg)) {
        struct Member {
            LinkId link;
            double lifetime;
        };
        std::map<detail::PolarRegion, std::vector<Member>> groups;
        for (const auto& [link, st] : topo.links) {
            if (link.kind != LinkKind::InterOrbit || !st.connected) continue;
            const int lp = link.endpoint_a.plane, hp = link.endpoint_b.plane;
            if (!((lp == pa && hp == pb) || (lp == pb && hp == pa))) continue;
            const auto region = detail::next_disconnect_region(cfg, link, t, st.lifetime);
            groups[region].push_back({link, st.lifetime});
        }
        for (const auto& [region, members] : groups) {
            (void)region;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& m : members) {
                lo = std::min(lo, m.lifetime);
                hi = std::max(hi, m.lifetime);
            }
            for (const auto& m : members)
                if (m.lifetime == lo || m.lifetime == hi) topo.zeta_links.insert(m.link);
        }
    }
    for (const auto& link : topo.zeta_links) topo.metric[link] = quantize_metric(params.zeta);
    return topo;
}

inline nlohmann::json topology_to_json(const WeightedTopology& topo) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [link, st] : topo.links) {
        nlohmann::json e;
        e["link"] = to_string(link);
        e["kind"] = to_string(link.kind);
        e["connected"] = st.connected;
        e["delay_ms"] = std::isfinite(st.delay) ? nlohmann::json(st.delay) : nlohmann::json();
        e["lifetime_s"] =
            std::isfinite(st.lifetime) ? nlohmann::json(st.lifetime) : nlohmann::json();
        const auto it = topo.metric.find(link);
        e["metric_ms"] = it != topo.metric.end() ? nlohmann::json(it->second) : nlohmann::json();
        edges.push_back(e);
    }
    return nlohmann::json{{"timestamp", topo.timestamp}, {"edges", edges}};
}

}  // namespace satnet
