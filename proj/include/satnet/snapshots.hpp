#pragma once

// Divide-and-merge topology model.
//
// The system period is divided into short snapshots (a regular grid that
// restarts at every connectivity event, so every event time is a snapshot
// boundary), then contiguous runs of divided snapshots are merged by a
// dynamic program that trades the error of a stale route table against a
// fixed per-update cost. Two baseline planners are provided: one that cuts
// only at connectivity events, and a fixed-interval planner that also cuts
// at events.
//
// Time conventions. A segment of divided indices [a, b] covers
// [times[a], times[b+1]) with times[n] = period; its route table is frozen
// at times[a]. Snapshot topologies are evaluated as right limits (state
// just after the boundary), so a link reconnecting exactly at an update
// time is part of the new table and one disconnecting there is not. An
// event sitting exactly on a segment's closing boundary contributes no
// error: the update there repairs it instantly.

#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "satnet/constellation.hpp"
#include "satnet/linkmodel.hpp"
#include "satnet/routing.hpp"

namespace satnet {

// Right-limit offset used when evaluating a snapshot's topology at its
// start time. Well below the 1e-6 s boundary-merge tolerance.
inline constexpr double kRightLimitEps = 1e-7;

enum class MetricKind { RawDelay, Llar };

struct RoutingMetric {
    MetricKind kind = MetricKind::RawDelay;
    MetricParams params;  // used by Llar only
};

inline WeightedTopology build_weights(const ConstellationConfig& cfg, double t,
                                      const RoutingMetric& metric) {
    return metric.kind == MetricKind::Llar ? llar_weights(cfg, t, metric.params)
                                           : raw_delay_weights(cfg, t);
}

struct DividedSnapshots {
    std::vector<double> times;  // t_0 < t_1 < ... < t_{n-1}, within [0, period)
    double period = 0.0;

    int n() const { return static_cast<int>(times.size()); }
    double end_of(int index) const {
        return index + 1 < n() ? times[index + 1] : period;
    }
};

// Distinct event times in [0, period), boundaries closer than 1e-6 s merged.
inline std::vector<double> distinct_event_times(const std::vector<LinkEvent>& events) {
    std::vector<double> out;
    for (const auto& ev : events) {
        if (out.empty() || ev.time > out.back() + 1e-6) out.push_back(ev.time);
    }
    return out;
}

// Regular grid restarted at every connectivity event, unioned with the
// event times themselves.
inline DividedSnapshots divide(const ConstellationConfig& cfg, double base_interval) {
    cfg.validate();
    if (!(base_interval > 0.0)) throw ConfigError("base_interval must be positive");
    DividedSnapshots out;
    out.period = cfg.system_period;
    std::vector<double> anchors = {0.0};
    for (double t : distinct_event_times(connectivity_events(cfg)))
        if (t > 1e-6 && t < out.period - 1e-6) anchors.push_back(t);
    std::sort(anchors.begin(), anchors.end());
    for (size_t i = 0; i < anchors.size(); ++i) {
        const double start = anchors[i];
        const double stop = i + 1 < anchors.size() ? anchors[i + 1] : out.period;
        out.times.push_back(start);
        for (int k = 1; start + k * base_interval < stop - 1e-6; ++k)
            out.times.push_back(start + k * base_interval);
    }
    return out;
}

// --- snapshot plans ------------------------------------------------------

struct SnapshotPlan {
    std::vector<double> times;                   // divided times the plan partitions
    double period = 0.0;
    std::vector<std::pair<int, int>> segments;   // inclusive index ranges over `times`
    std::vector<double> per_segment_error;
    double total_penalty = 0.0;

    int update_count() const { return static_cast<int>(segments.size()); }
    double update_time(int k) const { return times[segments[k].first]; }
    double segment_end(int k) const {
        return k + 1 < update_count() ? times[segments[k + 1].first] : period;
    }
    // Index of the segment whose [start, end) interval contains t.
    int segment_index_at(double t) const {
        int lo = 0, hi = update_count() - 1;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (update_time(mid) <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }
};

namespace detail {

inline SnapshotPlan singleton_plan(DividedSnapshots snaps) {
    SnapshotPlan plan;
    plan.times = std::move(snaps.times);
    plan.period = snaps.period;
    for (int i = 0; i < static_cast<int>(plan.times.size()); ++i) {
        plan.segments.push_back({i, i});
        plan.per_segment_error.push_back(0.0);
    }
    return plan;
}

}  // namespace detail

// Link-state routing baseline: a new snapshot whenever connectivity changes.
inline SnapshotPlan plan_plsr(const ConstellationConfig& cfg) {
    DividedSnapshots snaps;
    snaps.period = cfg.system_period;
    snaps.times.push_back(0.0);
    for (double t : distinct_event_times(connectivity_events(cfg)))
        if (t > 1e-6 && t < snaps.period - 1e-6) snaps.times.push_back(t);
    std::sort(snaps.times.begin(), snaps.times.end());
    return detail::singleton_plan(std::move(snaps));
}

// Fixed-interval baseline, modified to also cut at connectivity events.
inline SnapshotPlan plan_dtdvtr(const ConstellationConfig& cfg, double interval = 60.0) {
    return detail::singleton_plan(divide(cfg, interval));
}

// --- error model ---------------------------------------------------------

struct ErrorWeights {
    double w_n = 1.0;  // connectivity variation (reconnects + disconnects)
    double w_m = 1.0;  // link metric variation (suboptimal paths)
    double w_c = 1.0;  // per-snapshot update cost

    void validate() const {
        if (w_n < 0.0 || w_m < 0.0 || w_c < 0.0)
            throw ConfigError("error weights must be non-negative");
    }
};

// Reference time for the optimal-path length in the metric-drift term.
enum class EmReference { AtDelta, AtSegmentEnd };

struct TimedEvent {
    double time = 0.0;
    int divided_index = -1;
    LinkId link;
    LinkEventKind kind = LinkEventKind::Disconnect;
};

// Everything the error functional needs, precomputed per divided snapshot:
// the true topology (right limit), its route table, and per-link traversal
// counts.
struct Timeline {
    ConstellationConfig cfg;
    RoutingMetric metric;
    DividedSnapshots snaps;
    std::vector<WeightedTopology> topologies;
    std::vector<RouteTable> tables;
    std::vector<std::map<std::pair<int, int>, int>> link_counts;
    std::vector<std::vector<double>> metric_dense;  // [i][u*n+v], +inf when absent
    std::vector<TimedEvent> events;
    int num_nodes = 0;

    static Timeline build(const ConstellationConfig& cfg, const RoutingMetric& metric,
                          double base_interval) {
        cfg.validate();
        if (metric.kind == MetricKind::Llar) validate_metric_params(cfg, metric.params);
        Timeline tl;
        tl.cfg = cfg;
        tl.metric = metric;
        tl.snaps = divide(cfg, base_interval);
        tl.num_nodes = cfg.total_satellites();
        const int n = tl.snaps.n();
        tl.topologies.reserve(n);
        tl.tables.reserve(n);
        for (int i = 0; i < n; ++i) {
            WeightedTopology topo = build_weights(cfg, tl.snaps.times[i] + kRightLimitEps, metric);
            topo.timestamp = tl.snaps.times[i];
            tl.tables.push_back(all_pairs_routes(cfg, topo));
            tl.tables.back().topology_timestamp = tl.snaps.times[i];
            tl.link_counts.push_back(link_path_counts(tl.tables.back()));
            std::vector<double> dense(static_cast<size_t>(tl.num_nodes) * tl.num_nodes, kInfCost);
            for (const auto& [link, w] : topo.metric) {
                const int u = node_index(cfg, link.endpoint_a);
                const int v = node_index(cfg, link.endpoint_b);
                dense[static_cast<size_t>(u) * tl.num_nodes + v] = w;
                dense[static_cast<size_t>(v) * tl.num_nodes + u] = w;
            }
            tl.metric_dense.push_back(std::move(dense));
            tl.topologies.push_back(std::move(topo));
        }
        for (const auto& ev : connectivity_events(cfg)) {
            if (ev.time >= tl.snaps.period - 1e-6) continue;
            const auto it = std::lower_bound(tl.snaps.times.begin(), tl.snaps.times.end(),
                                             ev.time - 1e-9);
            if (it == tl.snaps.times.end() || std::abs(*it - ev.time) > 1e-6) continue;
            TimedEvent te;
            te.time = *it;
            te.divided_index = static_cast<int>(it - tl.snaps.times.begin());
            te.link = ev.link;
            te.kind = ev.kind;
            tl.events.push_back(te);
        }
        return tl;
    }

    int count_through(int table_index, const LinkId& link) const {
        const int u = node_index(cfg, link.endpoint_a);
        const int v = node_index(cfg, link.endpoint_b);
        const auto& counts = link_counts[table_index];
        const auto it = counts.find({std::min(u, v), std::max(u, v)});
        return it == counts.end() ? 0 : it->second;
    }
};

// Precomputed error components: e(a, b) = w_n * conn(a, b) + w_m * drift(a, b).
//
// conn(a, b) accumulates, over every event strictly inside the segment, the
// number of affected paths weighted by the fraction of the segment left
// after the event. For a disconnect the affected paths are counted in the
// frozen table; for a reconnect they are counted in the table the update
// would have produced at the event time.
//
// drift(a, b) sums, over (s, d) pairs whose frozen path first turns
// suboptimal at a divided time inside the segment, the relative length gap
// at that time. Pairs whose frozen path is physically broken are skipped
// here; the disconnect term already accounts for them.
class ErrorComponents {
public:
    ErrorComponents(const Timeline& tl, EmReference em_reference = EmReference::AtDelta)
        : timeline_(&tl), n_(tl.snaps.n()), em_reference_(em_reference) {
        build_conn();
        build_drift();
    }

    int n() const { return n_; }

    double conn(int a, int b) const { return conn_[static_cast<size_t>(a) * n_ + b]; }

    double drift(int a, int b) const {
        if (em_reference_ == EmReference::AtDelta)
            return drift_prefix_[static_cast<size_t>(a) * n_ + b];
        double sum = 0.0;
        const auto& table_b = timeline_->tables[b];
        for (const auto& e : flagged_[a]) {
            if (e.index > b) break;
            const double opt = table_b.path_cost(e.s, e.d);
            if (!std::isfinite(opt)) continue;
            sum += std::abs(e.frozen_len - opt) / e.frozen_len;
        }
        return sum;
    }

    double error(int a, int b, const ErrorWeights& w) const {
        return w.w_n * conn(a, b) + w.w_m * drift(a, b);
    }

private:
    void build_conn() {
        conn_.assign(static_cast<size_t>(n_) * n_, 0.0);
        // Events grouped by divided index for the in-order sweep.
        std::vector<std::vector<const TimedEvent*>> by_index(n_);
        for (const auto& ev : timeline_->events) by_index[ev.divided_index].push_back(&ev);
        for (int a = 0; a < n_; ++a) {
            double sum_l = 0.0, sum_lt = 0.0;
            for (int b = a; b < n_; ++b) {
                if (b > a) {
                    for (const TimedEvent* ev : by_index[b]) {
                        const int l = ev->kind == LinkEventKind::Disconnect
                                          ? timeline_->count_through(a, ev->link)
                                          : timeline_->count_through(b, ev->link);
                        sum_l += l;
                        sum_lt += l * ev->time;
                    }
                }
                const double t_end = timeline_->snaps.end_of(b);
                const double duration = t_end - timeline_->snaps.times[a];
                conn_[static_cast<size_t>(a) * n_ + b] =
                    duration > 0.0 ? (sum_l * t_end - sum_lt) / duration : 0.0;
            }
        }
    }

    void build_drift() {
        const int nodes = timeline_->num_nodes;
        drift_prefix_.assign(static_cast<size_t>(n_) * n_, 0.0);
        flagged_.assign(n_, {});
        std::vector<char> done(static_cast<size_t>(nodes) * nodes);
        for (int a = 0; a < n_; ++a) {
            std::fill(done.begin(), done.end(), 0);
            const RouteTable& frozen = timeline_->tables[a];
            double running = 0.0;
            for (int b = a; b < n_; ++b) {
                if (b > a) {
                    const std::vector<double>& metric_b = timeline_->metric_dense[b];
                    const RouteTable& table_b = timeline_->tables[b];
                    for (int s = 0; s < nodes; ++s) {
                        for (int d = 0; d < nodes; ++d) {
                            if (s == d || done[static_cast<size_t>(s) * nodes + d]) continue;
                            // Frozen path length under the metric at time b.
                            double len = 0.0;
                            bool broken = false;
                            int v = d;
                            while (v != s) {
                                const int p = frozen.predecessor(s, v);
                                if (p < 0) {
                                    broken = true;  // unreachable in frozen table
                                    break;
                                }
                                const double w = metric_b[static_cast<size_t>(v) * nodes + p];
                                if (!std::isfinite(w)) {
                                    broken = true;
                                    break;
                                }
                                len += w;
                                v = p;
                            }
                            if (broken) {
                                done[static_cast<size_t>(s) * nodes + d] = 1;
                                continue;
                            }
                            const double opt = table_b.path_cost(s, d);
                            if (len > opt + 1e-9 * std::max(1.0, opt)) {
                                done[static_cast<size_t>(s) * nodes + d] = 1;
                                running += (len - opt) / len;
                                if (em_reference_ == EmReference::AtSegmentEnd)
                                    flagged_[a].push_back({b, s, d, len});
                            }
                        }
                    }
                }
                drift_prefix_[static_cast<size_t>(a) * n_ + b] = running;
            }
        }
    }

    struct Flagged {
        int index;  // divided time at which the pair first turned suboptimal
        int s, d;
        double frozen_len;
    };

    const Timeline* timeline_;
    int n_;
    EmReference em_reference_;
    std::vector<double> conn_;
    std::vector<double> drift_prefix_;
    std::vector<std::vector<Flagged>> flagged_;
};

inline double segment_error(const ErrorComponents& components, int i, int j,
                            const ErrorWeights& weights) {
    if (j < i) throw ConfigError("segment_error: segment end precedes its start");
    return components.error(i, j, weights);
}

// --- dynamic programming merge -------------------------------------------

// Minimum-penalty contiguous partition of n divided snapshots. Among
// equal-penalty splits the shortest first segment wins, which makes the
// plan deterministic.
inline SnapshotPlan merge_dp(int n, const std::function<double(int, int)>& error, double w_c,
                             std::vector<double> times, double period) {
    if (n <= 0) throw ConfigError("merge_dp: no snapshots to merge");
    std::vector<double> best(n + 1, 0.0);
    std::vector<int> split(n, 0);
    for (int i = n - 1; i >= 0; --i) {
        double lowest = kInfCost;
        int choice = i;
        for (int k = i; k < n; ++k) {
            const double penalty = error(i, k) + w_c + best[k + 1];
            if (penalty < lowest) {
                lowest = penalty;
                choice = k;
            }
        }
        best[i] = lowest;
        split[i] = choice;
    }
    SnapshotPlan plan;
    plan.times = std::move(times);
    plan.period = period;
    plan.total_penalty = best[0];
    for (int i = 0; i < n; i = split[i] + 1) {
        plan.segments.push_back({i, split[i]});
        plan.per_segment_error.push_back(error(i, split[i]));
    }
    return plan;
}

inline SnapshotPlan merge_dp(const Timeline& tl, const ErrorComponents& components,
                             const ErrorWeights& weights) {
    weights.validate();
    return merge_dp(
        components.n(),
        [&](int a, int b) { return components.error(a, b, weights); }, weights.w_c,
        tl.snaps.times, tl.snaps.period);
}

// Matrix overload for small hand-built instances.
inline SnapshotPlan merge_dp(const std::vector<std::vector<double>>& errors, double w_c) {
    const int n = static_cast<int>(errors.size());
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) times[i] = i;
    return merge_dp(
        n, [&](int a, int b) { return errors[a][b]; }, w_c, std::move(times),
        static_cast<double>(n));
}

// --- weight sweeps -------------------------------------------------------

enum class SweepWhich { WN, WM };

inline std::vector<std::pair<double, int>> weight_sweep(const Timeline& tl,
                                                        const ErrorComponents& components,
                                                        SweepWhich which,
                                                        const std::vector<double>& values,
                                                        double w_c = 1.0) {
    std::vector<std::pair<double, int>> out;
    for (double v : values) {
        ErrorWeights w;
        w.w_c = w_c;
        w.w_n = which == SweepWhich::WN ? v : 0.0;
        w.w_m = which == SweepWhich::WM ? v : 0.0;
        out.push_back({v, merge_dp(tl, components, w).update_count()});
    }
    return out;
}

// --- exports -------------------------------------------------------------

inline std::string plan_csv(const SnapshotPlan& plan) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "segment_index,start_s,end_s,error,update_time_s\n";
    for (int k = 0; k < plan.update_count(); ++k)
        out << k << ',' << plan.update_time(k) << ',' << plan.segment_end(k) << ','
            << plan.per_segment_error[k] << ',' << plan.update_time(k) << '\n';
    return out.str();
}

inline nlohmann::json plan_to_json(const SnapshotPlan& plan) {
    nlohmann::json updates = nlohmann::json::array();
    for (int k = 0; k < plan.update_count(); ++k)
        updates.push_back({{"start_s", plan.update_time(k)},
                           {"end_s", plan.segment_end(k)},
                           {"error", plan.per_segment_error[k]}});
    return nlohmann::json{{"period_s", plan.period},
                          {"total_penalty", plan.total_penalty},
                          {"updates", updates}};
}

}  // namespace satnet
