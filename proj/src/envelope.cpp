#include "limtest/envelope.hpp"

#include <algorithm>
#include <limits>

namespace limtest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clip_margin(double m) { return std::clamp(m, -1.0, 1.0); }

const SnapshotNeighbor* closest_leader(const Snapshot& snap, int lane) {
    const SnapshotNeighbor* lead = nullptr;
    for (const auto& n : snap.neighbors) {
        if (!n.ahead || n.lane != lane) continue;
        if (lead == nullptr || n.gap < lead->gap) lead = &n;
    }
    return lead;
}

const SnapshotNeighbor* closest_follower(const Snapshot& snap, int lane) {
    const SnapshotNeighbor* follower = nullptr;
    for (const auto& n : snap.neighbors) {
        if (n.ahead || n.lane != lane) continue;
        if (follower == nullptr || n.gap > follower->gap) follower = &n;
    }
    return follower;
}

}  // namespace

double ttc(double gap, double closing_speed) {
    if (gap < 0.0) return 0.0;
    if (closing_speed <= 0.0) return kInf;
    return gap / closing_speed;
}

double instantaneous_margin(const Snapshot& snapshot, const EnvelopeSpec& spec,
                            std::string& binding_constraint) {
    double m = kInf;
    binding_constraint.clear();
    auto consider = [&](double candidate, const char* name) {
        if (candidate < m) {
            m = candidate;
            binding_constraint = name;
        }
    };

    if (const auto* lead = closest_leader(snapshot, snapshot.ego_lane)) {
        const double required = spec.d0 + spec.tau * snapshot.v_ego;
        consider(clip_margin((lead->gap - required) / required), "front_gap");

        const double t = ttc(lead->gap, -lead->dv);
        consider(clip_margin((std::min(t, spec.ttc_cap) - spec.ttc_min) / spec.ttc_min),
                 "ttc");
    }

    if (snapshot.lane_change_active) {
        if (const auto* follower = closest_follower(snapshot, snapshot.target_lane)) {
            const double required = spec.rear_d0 + spec.rear_tau * follower->v;
            consider(clip_margin((-follower->gap - required) / required),
                     "rear_gap");
        }
    }

    const double clearance =
        std::min(snapshot.d_ego - spec.lat_min, spec.lat_max - snapshot.d_ego);
    consider(clip_margin((clearance - spec.lat_required) / spec.lat_required),
             "lateral");

    if (m == kInf) {
        binding_constraint = "none";
        return 1.0;
    }
    return m;
}

double instantaneous_margin(const Snapshot& snapshot, const EnvelopeSpec& spec) {
    std::string ignored;
    return instantaneous_margin(snapshot, spec, ignored);
}

Snapshot snapshot_at(const Trace& trace, std::size_t index) {
    Snapshot snap;
    const VehicleState& ego = trace.ego[index];
    snap.v_ego = ego.v;
    snap.d_ego = ego.d;
    snap.ego_lane = ego.lane;
    const int target = trace.ego_change_target[index];
    snap.lane_change_active = target >= 0;
    snap.target_lane = std::max(target, 0);
    snap.neighbors.reserve(trace.agents.size());
    for (const auto& agent : trace.agents) {
        const VehicleState& st = agent[index];
        SnapshotNeighbor n;
        const double offset = st.s - ego.s;
        n.gap = bumper_gap(offset, trace.config.vehicle_length);
        n.dv = st.v - ego.v;
        n.lane = st.lane;
        n.v = st.v;
        n.ahead = offset >= 0.0;
        snap.neighbors.push_back(n);
    }
    return snap;
}

MarginReport trace_margin(const Trace& trace, const EnvelopeSpec& spec) {
    MarginReport report;
    report.margin.reserve(trace.times.size());
    report.m_star = kInf;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::string constraint;
        const double m = instantaneous_margin(snapshot_at(trace, i), spec, constraint);
        report.margin.push_back(m);
        if (m < report.m_star) {
            report.m_star = m;
            report.argmin_time = trace.times[i];
            report.argmin_constraint = constraint;
        }
    }
    if (trace.times.empty()) {
        report.m_star = 1.0;
        report.argmin_constraint = "none";
    }
    report.violated = report.m_star < 0.0;
    return report;
}

}  // namespace limtest
