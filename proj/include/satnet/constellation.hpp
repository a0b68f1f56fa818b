#pragma once

// Analytic model of a polar-orbit LEO constellation (Walker star):
// satellite positions on circular orbits, inter-satellite link (ISL)
// candidates, and the polar-region connectivity schedule. Everything here
// is a pure function of (config, time); there is no simulation state.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace satnet {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kLightSpeedKmPerS = 299792.458;

// Raised for malformed configs and scenario files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConstellationConfig {
    int num_planes = 6;
    int sats_per_plane = 11;
    double altitude = 780.0;            // km above mean Earth radius
    double inclination = 90.0;          // degrees; the model requires exactly 90
    double system_period = 6028.6;      // seconds for one full orbit
    double polar_boundary_lat = 70.3124; // degrees; |lat| >= boundary drops inter-orbit ISLs
    std::pair<int, int> seam_pair = {5, 0}; // adjacent-plane pair with no inter-orbit ISLs
    double phase_offset = 0.5;          // fraction of in-plane spacing between adjacent planes

    int total_satellites() const { return num_planes * sats_per_plane; }
    double orbit_radius_km() const { return kEarthRadiusKm + altitude; }
    // Angular spacing of satellites within a plane, degrees.
    double slot_spacing_deg() const { return 360.0 / sats_per_plane; }
    // Longitude spacing of ascending nodes, degrees (planes spread over 180).
    double plane_spacing_deg() const { return 180.0 / num_planes; }
    double angular_rate_deg_per_s() const { return 360.0 / system_period; }

    void validate() const {
        if (num_planes < 2) throw ConfigError("num_planes must be >= 2");
        if (sats_per_plane < 3) throw ConfigError("sats_per_plane must be >= 3");
        if (!(altitude > 0.0)) throw ConfigError("altitude must be positive");
        if (inclination != 90.0)
            throw ConfigError("only inclination 90 (pure polar orbits) is supported");
        if (!(system_period > 0.0)) throw ConfigError("system_period must be positive");
        if (!(polar_boundary_lat > 0.0 && polar_boundary_lat < 90.0))
            throw ConfigError("polar_boundary_lat must be in (0, 90)");
        if (!(phase_offset >= 0.0 && phase_offset <= 1.0))
            throw ConfigError("phase_offset must be in [0, 1]");
        const int p = seam_pair.first;
        if (p < 0 || p >= num_planes || seam_pair.second != (p + 1) % num_planes)
            throw ConfigError("seam_pair must be an adjacent plane pair (p, p+1 mod num_planes)");
    }
};

struct SatelliteId {
    int plane = 0;
    int slot = 0;

    auto operator<=>(const SatelliteId&) const = default;
};

inline int node_index(const ConstellationConfig& cfg, const SatelliteId& id) {
    return id.plane * cfg.sats_per_plane + id.slot;
}

inline SatelliteId node_from_index(const ConstellationConfig& cfg, int index) {
    return SatelliteId{index / cfg.sats_per_plane, index % cfg.sats_per_plane};
}

inline std::string to_string(const SatelliteId& id) {
    return std::to_string(id.plane) + "-" + std::to_string(id.slot);
}

struct GeoPosition {
    double latitude = 0.0;   // degrees, [-90, 90]
    double longitude = 0.0;  // degrees, [-180, 180)
    double radius = 0.0;     // km from Earth center
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline double distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

enum class LinkKind { IntraOrbit, InterOrbit };

inline const char* to_string(LinkKind k) {
    return k == LinkKind::IntraOrbit ? "intra_orbit" : "inter_orbit";
}

struct LinkId {
    SatelliteId endpoint_a;  // canonical: endpoint_a < endpoint_b
    SatelliteId endpoint_b;
    LinkKind kind = LinkKind::IntraOrbit;

    LinkId() = default;
    LinkId(SatelliteId a, SatelliteId b, LinkKind k) : endpoint_a(a), endpoint_b(b), kind(k) {
        if (endpoint_b < endpoint_a) std::swap(endpoint_a, endpoint_b);
    }

    auto operator<=>(const LinkId&) const = default;
};

inline std::string to_string(const LinkId& l) {
    return to_string(l.endpoint_a) + "~" + to_string(l.endpoint_b);
}

namespace detail {

inline double deg2rad(double d) { return d * M_PI / 180.0; }

// Fold an angle into [0, 360).
inline double wrap360(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r;
}

inline void check_id(const ConstellationConfig& cfg, const SatelliteId& id) {
    if (id.plane < 0 || id.plane >= cfg.num_planes || id.slot < 0 || id.slot >= cfg.sats_per_plane)
        throw ConfigError("satellite id out of range: " + to_string(id));
}

// Argument of latitude (angle along the orbit from the ascending node),
// degrees in [0, 360).
inline double orbit_phase_deg(const ConstellationConfig& cfg, const SatelliteId& id, double t) {
    const double slot_phase = id.slot * cfg.slot_spacing_deg();
    const double plane_phase = id.plane * cfg.phase_offset * cfg.slot_spacing_deg();
    return wrap360(slot_phase + plane_phase + t * cfg.angular_rate_deg_per_s());
}

// Latitude of a satellite at orbit phase u (inclination 90): piecewise linear,
// exact in u, so boundary-crossing times are closed form.
inline double latitude_from_phase(double u /*[0,360)*/) {
    if (u <= 90.0) return u;
    if (u <= 270.0) return 180.0 - u;
    return u - 360.0;
}

// True while the satellite is on the ascending half of the orbit
// (longitude = plane node longitude).
inline bool ascending_side(double u) { return u < 90.0 || u >= 270.0; }

}  // namespace detail

inline GeoPosition satellite_position(const ConstellationConfig& cfg, const SatelliteId& id,
                                      double t) {
    detail::check_id(cfg, id);
    const double u = detail::orbit_phase_deg(cfg, id, t);
    GeoPosition pos;
    pos.latitude = detail::latitude_from_phase(u);
    const double node_lon = id.plane * cfg.plane_spacing_deg();
    double lon = detail::ascending_side(u) ? node_lon : node_lon + 180.0;
    lon = detail::wrap360(lon + 180.0) - 180.0;  // [-180, 180)
    pos.longitude = lon;
    pos.radius = cfg.orbit_radius_km();
    return pos;
}

inline Vec3 satellite_cartesian(const ConstellationConfig& cfg, const SatelliteId& id, double t) {
    detail::check_id(cfg, id);
    const double u = detail::deg2rad(detail::orbit_phase_deg(cfg, id, t));
    const double lon = detail::deg2rad(id.plane * cfg.plane_spacing_deg());
    const double r = cfg.orbit_radius_km();
    return Vec3{r * std::cos(u) * std::cos(lon), r * std::cos(u) * std::sin(lon),
                r * std::sin(u)};
}

inline Vec3 unit_vector(const GeoPosition& p) {
    const double lat = detail::deg2rad(p.latitude);
    const double lon = detail::deg2rad(p.longitude);
    return Vec3{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

// Adjacent plane pairs carrying inter-orbit ISLs: (p, p+1 mod N) minus the seam.
inline std::vector<std::pair<int, int>> inter_orbit_plane_pairs(const ConstellationConfig& cfg) {
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < cfg.num_planes; ++p) {
        std::pair<int, int> cand{p, (p + 1) % cfg.num_planes};
        if (cand != cfg.seam_pair) pairs.push_back(cand);
    }
    // The wrap adjacency duplicates (0,1) when there are only two planes.
    if (cfg.num_planes == 2 && pairs.size() == 2) pairs.pop_back();
    return pairs;
}

inline std::vector<LinkId> intra_orbit_links(const ConstellationConfig& cfg) {
    std::vector<LinkId> links;
    links.reserve(static_cast<size_t>(cfg.num_planes) * cfg.sats_per_plane);
    for (int p = 0; p < cfg.num_planes; ++p)
        for (int s = 0; s < cfg.sats_per_plane; ++s)
            links.emplace_back(SatelliteId{p, s}, SatelliteId{p, (s + 1) % cfg.sats_per_plane},
                               LinkKind::IntraOrbit);
    std::sort(links.begin(), links.end());
    return links;
}

// All inter-orbit link candidates (slot i in plane p to slot i in plane p+1);
// whether each is connected at a given time is a separate question.
inline std::vector<LinkId> inter_orbit_links(const ConstellationConfig& cfg) {
    std::vector<LinkId> links;
    for (const auto& [pa, pb] : inter_orbit_plane_pairs(cfg))
        for (int s = 0; s < cfg.sats_per_plane; ++s)
            links.emplace_back(SatelliteId{pa, s}, SatelliteId{pb, s}, LinkKind::InterOrbit);
    std::sort(links.begin(), links.end());
    return links;
}

inline std::vector<LinkId> all_links(const ConstellationConfig& cfg) {
    auto links = intra_orbit_links(cfg);
    auto inter = inter_orbit_links(cfg);
    links.insert(links.end(), inter.begin(), inter.end());
    std::sort(links.begin(), links.end());
    return links;
}

// The boundary itself belongs to the polar region: |lat| >= boundary.
inline bool in_polar_region(const ConstellationConfig& cfg, const SatelliteId& id, double t) {
    return std::abs(satellite_position(cfg, id, t).latitude) >= cfg.polar_boundary_lat;
}

inline bool link_connected(const ConstellationConfig& cfg, const LinkId& link, double t) {
    if (link.kind == LinkKind::IntraOrbit) return true;
    return !in_polar_region(cfg, link.endpoint_a, t) && !in_polar_region(cfg, link.endpoint_b, t);
}

struct LinkPresence {
    LinkId link;
    bool connected = false;
};

inline std::vector<LinkPresence> connectivity(const ConstellationConfig& cfg, double t) {
    cfg.validate();
    std::vector<LinkPresence> out;
    for (const auto& l : all_links(cfg)) out.push_back({l, link_connected(cfg, l, t)});
    return out;
}

enum class LinkEventKind { Disconnect, Reconnect };

inline const char* to_string(LinkEventKind k) {
    return k == LinkEventKind::Disconnect ? "disconnect" : "reconnect";
}

struct LinkEvent {
    double time = 0.0;  // seconds in [0, system_period)
    LinkId link;
    LinkEventKind kind = LinkEventKind::Disconnect;
};

namespace detail {

// Arcs of the orbit phase of endpoint_a during which the link is down,
// expressed as [start, end) intervals in degrees that may wrap past 360.
struct PhaseArc {
    double start = 0.0;
    double length = 0.0;
};

inline std::vector<PhaseArc> polar_blackout_arcs(const ConstellationConfig& cfg,
                                                 const LinkId& link) {
    const double B = cfg.polar_boundary_lat;
    const double eps = 1e-12;
    // Phase lead of endpoint_b over endpoint_a along their common direction
    // of motion (both planes rotate the same way).
    const double delta = wrap360((link.endpoint_b.plane - link.endpoint_a.plane) *
                                     cfg.phase_offset * cfg.slot_spacing_deg() +
                                 (link.endpoint_b.slot - link.endpoint_a.slot) *
                                     cfg.slot_spacing_deg());
    // Satellite at phase u is inside a polar region for u in [B, 180-B]
    // (north) and [180+B, 360-B] (south). The link is down while either
    // endpoint is inside; endpoint_b sits at phase u_a + delta.
    const double polar_len = 180.0 - 2.0 * B;
    std::vector<std::pair<double, double>> down;  // [start, end) in u_a, end may exceed 360
    for (double s : {B, 180.0 + B, wrap360(B - delta), wrap360(180.0 + B - delta)})
        down.push_back({s, s + polar_len});

    // Union of intervals on the circle: merge on the line, then fold the
    // overflow past 360 back into the leading intervals.
    std::sort(down.begin(), down.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& [s, e] : down) {
        if (!merged.empty() && s <= merged.back().second + eps)
            merged.back().second = std::max(merged.back().second, e);
        else
            merged.push_back({s, e});
    }
    while (merged.size() > 1 && merged.back().second >= merged.front().first + 360.0 - eps) {
        merged.back().second = std::max(merged.back().second, merged.front().second + 360.0);
        merged.erase(merged.begin());
    }
    std::vector<PhaseArc> arcs;
    for (const auto& [s, e] : merged) arcs.push_back({s, e - s});
    return arcs;
}

}  // namespace detail

// Whole-period connectivity schedule, computed analytically from the
// latitude-crossing phases (no time sampling). Inter-orbit links that are
// never connected (blackouts covering the whole circle) produce no events.
inline std::vector<LinkEvent> connectivity_events(const ConstellationConfig& cfg) {
    cfg.validate();
    std::vector<LinkEvent> events;
    const double rate = cfg.angular_rate_deg_per_s();
    for (const auto& link : inter_orbit_links(cfg)) {
        const auto arcs = detail::polar_blackout_arcs(cfg, link);
        double down_total = 0.0;
        for (const auto& a : arcs) down_total += a.length;
        if (down_total >= 360.0 - 1e-9) continue;  // permanently disconnected
        const double u0 = detail::orbit_phase_deg(cfg, link.endpoint_a, 0.0);
        for (const auto& arc : arcs) {
            const double t_down = detail::wrap360(arc.start - u0) / rate;
            const double t_up = detail::wrap360(arc.start + arc.length - u0) / rate;
            events.push_back({t_down, link, LinkEventKind::Disconnect});
            events.push_back({t_up, link, LinkEventKind::Reconnect});
        }
    }
    std::sort(events.begin(), events.end(), [](const LinkEvent& a, const LinkEvent& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.link != b.link) return a.link < b.link;
        return a.kind < b.kind;
    });
    return events;
}

// --- JSON config loading -----------------------------------------------

// Strict field set: unknown keys are rejected so a typo in an experiment
// config fails loudly instead of silently using a default.
inline ConstellationConfig constellation_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "num_planes",       "sats_per_plane", "altitude",   "inclination",
        "system_period",    "polar_boundary_lat", "seam_pair", "phase_offset"};
    if (!j.is_object()) throw ConfigError("constellation config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown constellation config key: \"" + key + "\"");
    }
    ConstellationConfig cfg;
    if (j.contains("num_planes")) cfg.num_planes = j.at("num_planes").get<int>();
    if (j.contains("sats_per_plane")) cfg.sats_per_plane = j.at("sats_per_plane").get<int>();
    if (j.contains("altitude")) cfg.altitude = j.at("altitude").get<double>();
    if (j.contains("inclination")) cfg.inclination = j.at("inclination").get<double>();
    if (j.contains("system_period")) cfg.system_period = j.at("system_period").get<double>();
    if (j.contains("polar_boundary_lat"))
        cfg.polar_boundary_lat = j.at("polar_boundary_lat").get<double>();
    if (j.contains("seam_pair")) {
        const auto& sp = j.at("seam_pair");
        if (!sp.is_array() || sp.size() != 2) throw ConfigError("seam_pair must be [plane, plane]");
        cfg.seam_pair = {sp[0].get<int>(), sp[1].get<int>()};
    } else {
        cfg.seam_pair = {cfg.num_planes - 1, 0};
    }
    if (j.contains("phase_offset")) cfg.phase_offset = j.at("phase_offset").get<double>();
    cfg.validate();
    return cfg;
}

inline nlohmann::json constellation_to_json(const ConstellationConfig& cfg) {
    return nlohmann::json{{"num_planes", cfg.num_planes},
                          {"sats_per_plane", cfg.sats_per_plane},
                          {"altitude", cfg.altitude},
                          {"inclination", cfg.inclination},
                          {"system_period", cfg.system_period},
                          {"polar_boundary_lat", cfg.polar_boundary_lat},
                          {"seam_pair", {cfg.seam_pair.first, cfg.seam_pair.second}},
                          {"phase_offset", cfg.phase_offset}};
}

}  // namespace satnet
