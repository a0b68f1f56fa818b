#pragma once

// Scenario runner: constellation -> weighted topologies -> snapshot plan ->
// route tables -> stability / traffic reports, plus the comparison and
// sweep drivers behind the CLI. Runs are deterministic end to end: the same
// scenario file and seed produce byte-identical artifacts.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "satnet/constellation.hpp"
#include "satnet/linkmodel.hpp"
#include "satnet/routing.hpp"
#include "satnet/snapshots.hpp"
#include "satnet/traffic.hpp"

namespace satnet {

enum class PlannerKind { Dp, Plsr, Dtdvtr };

struct PlannerSpec {
    PlannerKind kind = PlannerKind::Dp;
    ErrorWeights weights;                          // dp only
    double base_interval = 30.0;                   // dp divided-snapshot grid
    EmReference em_reference = EmReference::AtDelta;  // dp only
    double interval = 60.0;                        // dtdvtr only
};

struct Scenario {
    std::string name = "scenario";
    ConstellationConfig constellation;
    RoutingMetric metric;
    PlannerSpec planner;
    std::optional<TrafficScenario> traffic;
    std::string outputs = "out";
};

// --- JSON loading --------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown " + where + " key: \"" + key + "\"");
    }
}

}  // namespace detail

inline RoutingMetric metric_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, {"kind", "zeta"}, "metric");
    RoutingMetric m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "llar")
        m.kind = MetricKind::Llar;
    else if (kind == "raw_delay")
        m.kind = MetricKind::RawDelay;
    else
        throw ConfigError("metric kind must be \"llar\" or \"raw_delay\"");
    if (j.contains("zeta")) {
        if (m.kind != MetricKind::Llar) throw ConfigError("zeta only applies to the llar metric");
        m.params.zeta = j.at("zeta").get<double>();
    }
    return m;
}

inline PlannerSpec planner_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, {"kind", "weights", "base_interval", "e_m_reference", "interval"},
                                "planner");
    PlannerSpec p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dp") {
        p.kind = PlannerKind::Dp;
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            detail::reject_unknown_keys(w, {"w_n", "w_m", "w_c"}, "weights");
            if (w.contains("w_n")) p.weights.w_n = w.at("w_n").get<double>();
            if (w.contains("w_m")) p.weights.w_m = w.at("w_m").get<double>();
            if (w.contains("w_c")) p.weights.w_c = w.at("w_c").get<double>();
            p.weights.validate();
        }
        if (j.contains("base_interval")) p.base_interval = j.at("base_interval").get<double>();
        if (j.contains("e_m_reference")) {
            const std::string r = j.at("e_m_reference").get<std::string>();
            if (r == "at_delta")
                p.em_reference = EmReference::AtDelta;
            else if (r == "at_segment_end")
                p.em_reference = EmReference::AtSegmentEnd;
            else
                throw ConfigError("e_m_reference must be \"at_delta\" or \"at_segment_end\"");
        }
    } else if (kind == "plsr") {
        p.kind = PlannerKind::Plsr;
        detail::reject_unknown_keys(j, {"kind"}, "plsr planner");
    } else if (kind == "dtdvtr") {
        p.kind = PlannerKind::Dtdvtr;
        detail::reject_unknown_keys(j, {"kind", "interval"}, "dtdvtr planner");
        if (j.contains("interval")) p.interval = j.at("interval").get<double>();
        if (!(p.interval > 0.0)) throw ConfigError("dtdvtr interval must be positive");
    } else {
        throw ConfigError("planner kind must be \"dp\", \"plsr\" or \"dtdvtr\"");
    }
    return p;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, {"constellation", "metric", "planner", "traffic", "outputs"},
                                "scenario");
    Scenario s;
    s.constellation =
        j.contains("constellation") ? constellation_from_json(j.at("constellation"))
                                    : ConstellationConfig{};
    s.constellation.validate();
    if (!j.contains("metric")) throw ConfigError("scenario requires a \"metric\" section");
    s.metric = metric_from_json(j.at("metric"));
    if (!j.contains("planner")) throw ConfigError("scenario requires a \"planner\" section");
    s.planner = planner_from_json(j.at("planner"));
    if (j.contains("traffic") && !j.at("traffic").is_null() && !j.at("traffic").empty())
        s.traffic = traffic_from_json(j.at("traffic"));
    if (j.contains("outputs")) s.outputs = j.at("outputs").get<std::string>();
    return s;
}

namespace detail {

inline int line_of_offset(const std::string& text, size_t offset) {
    int line = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Best-effort line number for semantic errors: locate the first quoted
// token of the message in the file text.
inline std::string annotate_with_line(const std::string& text, const std::string& message) {
    const size_t q1 = message.find('"');
    const size_t q2 = q1 == std::string::npos ? std::string::npos : message.find('"', q1 + 1);
    if (q2 != std::string::npos) {
        const std::string token = message.substr(q1, q2 - q1 + 1);
        const size_t pos = text.find(token);
        if (pos != std::string::npos)
            return message + " (line " + std::to_string(line_of_offset(text, pos)) + ")";
    }
    return message;
}

}  // namespace detail

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": line " +
                          std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
    }
    try {
        Scenario s = scenario_from_json(j);
        s.name = std::filesystem::path(path).stem().string();
        return s;
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + detail::annotate_with_line(text, e.what()));
    }
}

// --- pipeline ------------------------------------------------------------

inline RouteTable compute_table(const ConstellationConfig& cfg, const RoutingMetric& metric,
                                double t) {
    WeightedTopology topo = build_weights(cfg, t + kRightLimitEps, metric);
    topo.timestamp = t;
    RouteTable table = all_pairs_routes(cfg, topo);
    table.topology_timestamp = t;
    return table;
}

// One table per plan segment, frozen at the segment start. Tables whose
// start coincides with a timeline snapshot are reused.
inline std::vector<RouteTable> plan_tables(const ConstellationConfig& cfg,
                                           const RoutingMetric& metric, const SnapshotPlan& plan,
                                           const Timeline* timeline = nullptr) {
    std::vector<RouteTable> tables;
    tables.reserve(plan.update_count());
    for (int k = 0; k < plan.update_count(); ++k) {
        const double t = plan.update_time(k);
        if (timeline) {
            const auto& ts = timeline->snaps.times;
            const auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-9);
            if (it != ts.end() && std::abs(*it - t) <= 1e-9) {
                tables.push_back(timeline->tables[it - ts.begin()]);
                continue;
            }
        }
        tables.push_back(compute_table(cfg, metric, t));
    }
    return tables;
}

struct StabilityReport {
    struct Update {
        double time = 0.0;
        int changed_paths = 0;
        int affected_satellites = 0;
    };
    std::vector<Update> updates;  // one per plan segment; entry 0 is the period-wrap update
    double mean_changed_paths = 0.0;
    double mean_affected_satellites = 0.0;
    int max_changed_paths = 0;
    int max_affected_satellites = 0;
    long total_changed_paths = 0;
};

// Cyclic per-update diffs: the update at the period start is compared
// against the last segment of the previous period (identical by
// periodicity).
inline StabilityReport stability_report(const SnapshotPlan& plan,
                                        const std::vector<RouteTable>& tables) {
    StabilityReport rep;
    const int m = static_cast<int>(tables.size());
    for (int k = 0; k < m; ++k) {
        const RouteTable& prev = tables[(k + m - 1) % m];
        const RouteDiff diff = diff_routes(prev, tables[k]);
        rep.updates.push_back({plan.update_time(k), diff.changed_paths,
                               static_cast<int>(diff.affected_satellites.size())});
        rep.total_changed_paths += diff.changed_paths;
        rep.mean_changed_paths += diff.changed_paths;
        rep.mean_affected_satellites += diff.affected_satellites.size();
        rep.max_changed_paths = std::max(rep.max_changed_paths, diff.changed_paths);
        rep.max_affected_satellites =
            std::max(rep.max_affected_satellites, static_cast<int>(diff.affected_satellites.size()));
    }
    if (m > 0) {
        rep.mean_changed_paths /= m;
        rep.mean_affected_satellites /= m;
    }
    return rep;
}

inline std::string stability_csv(const StabilityReport& rep) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "update_time_s,changed_paths,affected_satellites\n";
    for (const auto& u : rep.updates)
        out << u.time << ',' << u.changed_paths << ',' << u.affected_satellites << '\n';
    return out.str();
}

struct RunResult {
    SnapshotPlan plan;
    std::vector<RouteTable> tables;
    StabilityReport stability;
    std::optional<TrafficReport> traffic;
    int divided_snapshot_count = 0;  // dp planner only; otherwise segment count
    nlohmann::json summary;
};

inline RunResult run_pipeline(const Scenario& scn) {
    RunResult result;
    const auto& cfg = scn.constellation;
    cfg.validate();
    if (scn.metric.kind == MetricKind::Llar) validate_metric_params(cfg, scn.metric.params);

    std::optional<Timeline> timeline;
    switch (scn.planner.kind) {
        case PlannerKind::Dp: {
            timeline = Timeline::build(cfg, scn.metric, scn.planner.base_interval);
            ErrorComponents components(*timeline, scn.planner.em_reference);
            result.plan = merge_dp(*timeline, components, scn.planner.weights);
            result.divided_snapshot_count = timeline->snaps.n();
            break;
        }
        case PlannerKind::Plsr:
            result.plan = plan_plsr(cfg);
            result.divided_snapshot_count = result.plan.update_count();
            break;
        case PlannerKind::Dtdvtr:
            result.plan = plan_dtdvtr(cfg, scn.planner.interval);
            result.divided_snapshot_count = result.plan.update_count();
            break;
    }
    result.tables = plan_tables(cfg, scn.metric, result.plan,
                                timeline ? &*timeline : nullptr);
    result.stability = stability_report(result.plan, result.tables);
    if (scn.traffic)
        result.traffic = evaluate(cfg, result.plan, result.tables, *scn.traffic,
                                  scn.traffic->step);

    nlohmann::json summary;
    summary["scenario"] = scn.name;
    summary["metric"] = scn.metric.kind == MetricKind::Llar ? "llar" : "raw_delay";
    if (scn.metric.kind == MetricKind::Llar) summary["zeta_ms"] = scn.metric.params.zeta;
    summary["planner"] = scn.planner.kind == PlannerKind::Dp      ? "dp"
                         : scn.planner.kind == PlannerKind::Plsr ? "plsr"
                                                                  : "dtdvtr";
    if (scn.planner.kind == PlannerKind::Dp)
        summary["e_m_reference"] = scn.planner.em_reference == EmReference::AtDelta
                                       ? "at_delta"
                                       : "at_segment_end";
    summary["update_count"] = result.plan.update_count();
    summary["divided_snapshot_count"] = result.divided_snapshot_count;
    summary["total_penalty"] = result.plan.total_penalty;
    summary["mean_changed_paths"] = result.stability.mean_changed_paths;
    summary["mean_affected_satellites"] = result.stability.mean_affected_satellites;
    summary["max_changed_paths"] = result.stability.max_changed_paths;
    summary["max_affected_satellites"] = result.stability.max_affected_satellites;
    summary["total_changed_paths"] = result.stability.total_changed_paths;
    if (result.traffic) {
        summary["traffic"] = {{"mean_loss", result.traffic->mean_loss},
                              {"peak_max_utilization", result.traffic->peak_max_utilization},
                              {"mean_max_utilization", result.traffic->mean_max_utilization},
                              {"offered_mb", result.traffic->offered_mb},
                              {"lost_mb", result.traffic->lost_mb},
                              {"lost_packets", result.traffic->lost_packets}};
    }
    result.summary = summary;
    return result;
}

// Runs the scenario and writes plan.csv, stability.csv, traffic.csv (when
// traffic is configured) and summary.json into the output directory.
inline RunResult run_scenario(const Scenario& scn, const std::string& output_override = "") {
    RunResult result = run_pipeline(scn);
    const std::filesystem::path dir = output_override.empty() ? scn.outputs : output_override;
    std::filesystem::create_directories(dir);
    const auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        if (!out) throw ConfigError("cannot write " + (dir / name).string());
    };
    write("plan.csv", plan_csv(result.plan));
    write("plan.json", plan_to_json(result.plan).dump(2) + "\n");
    write("stability.csv", stability_csv(result.stability));
    if (result.traffic) write("traffic.csv", traffic_csv(*result.traffic));
    write("summary.json", result.summary.dump(2) + "\n");
    return result;
}

// --- comparison drivers ---------------------------------------------------

struct CompareEntry {
    std::string name;
    RunResult result;
};

inline std::string compare_csv(const std::vector<CompareEntry>& entries) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "scenario,update_index,update_time_s,changed_paths,affected_satellites\n";
    for (const auto& e : entries) {
        const auto& ups = e.result.stability.updates;
        for (size_t k = 0; k < ups.size(); ++k)
            out << e.name << ',' << k << ',' << ups[k].time << ',' << ups[k].changed_paths << ','
                << ups[k].affected_satellites << '\n';
    }
    out << "# aggregate: scenario,update_count,mean_changed_paths,mean_affected_satellites,"
           "max_changed_paths,total_changed_paths\n";
    for (const auto& e : entries)
        out << "# " << e.name << ',' << e.result.plan.update_count() << ','
            << e.result.stability.mean_changed_paths << ','
            << e.result.stability.mean_affected_satellites << ','
            << e.result.stability.max_changed_paths << ','
            << e.result.stability.total_changed_paths << '\n';
    return out.str();
}

struct BoundarySweepRow {
    double boundary = 0.0;
    std::string name;
    int update_count = 0;
    long total_changed_paths = 0;
};

inline std::vector<BoundarySweepRow> boundary_sweep(const std::vector<Scenario>& scenarios,
                                                    const std::vector<double>& boundaries) {
    std::vector<BoundarySweepRow> rows;
    for (double b : boundaries) {
        for (const Scenario& base : scenarios) {
            Scenario scn = base;
            scn.constellation.polar_boundary_lat = b;
            const RunResult r = run_pipeline(scn);
            rows.push_back({b, scn.name, r.plan.update_count(),
                            r.stability.total_changed_paths});
        }
    }
    return rows;
}

inline std::string boundary_sweep_csv(const std::vector<BoundarySweepRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "polar_boundary_lat_deg,scenario,update_count,total_changed_paths\n";
    for (const auto& r : rows)
        out << r.boundary << ',' << r.name << ',' << r.update_count << ','
            << r.total_changed_paths << '\n';
    return out.str();
}

inline std::string weight_sweep_csv(const std::vector<std::pair<double, int>>& sweep,
                                    const std::string& which) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << which << ",update_count\n";
    for (const auto& [v, c] : sweep) out << v << ',' << c << '\n';
    return out.str();
}

inline std::string events_csv(const ConstellationConfig& cfg) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "time_s,plane_a,slot_a,plane_b,slot_b,event\n";
    for (const auto& ev : connectivity_events(cfg))
        out << ev.time << ',' << ev.link.endpoint_a.plane << ',' << ev.link.endpoint_a.slot << ','
            << ev.link.endpoint_b.plane << ',' << ev.link.endpoint_b.slot << ','
            << to_string(ev.kind) << '\n';
    return out.str();
}

}  // namespace satnet
