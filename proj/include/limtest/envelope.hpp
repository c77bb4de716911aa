#pragma once

#include <string>
#include <vector>

#include "limtest/simulation.hpp"

namespace limtest {

// Safe-operation-envelope boundary: required gaps, minimum time-to-collision
// and lateral road bounds. All margins are normalized by the requirement and
// clipped to [-1, +1]; a negative margin means the envelope was left.
struct EnvelopeSpec {
    double tau = 0.9;          // required time headway (s)
    double d0 = 1.5;           // required standstill gap (m)
    double rear_tau = 0.5;     // rear-gap requirement during lane change (s)
    double rear_d0 = 1.0;      // (m)
    double ttc_min = 1.5;      // minimum time-to-collision (s)
    double ttc_cap = 10.0;     // TTC capped here before normalization (s)
    double lat_min = -1.75;    // road bounds for the vehicle center (m)
    double lat_max = 5.25;
    double lat_required = 0.9;  // required center clearance to the road edge (m)
};

struct SnapshotNeighbor {
    double gap = 0.0;  // signed bumper-to-bumper gap, negative = behind
    double dv = 0.0;   // v_neighbor - v_ego
    int lane = 0;
    double v = 0.0;
    bool ahead = false;
};

struct Snapshot {
    double v_ego = 0.0;
    double d_ego = 0.0;
    int ego_lane = 0;
    bool lane_change_active = false;
    int target_lane = 0;
    std::vector<SnapshotNeighbor> neighbors;
};

struct MarginReport {
    std::vector<double> margin;    // per-sample m(t)
    double m_star = 1.0;           // min over samples and constraints
    bool violated = false;         // m_star < 0
    double argmin_time = 0.0;
    std::string argmin_constraint;
};

// gap/closing_speed for closing_speed > 0, +inf otherwise; a negative gap
// means already colliding and yields 0.
double ttc(double gap, double closing_speed);

// Min over the active constraints; +1 when none is active. Front gap and TTC
// are evaluated against the closest leader on the ego lane; the rear gap only
// while a lane change is active, against the target-lane follower.
double instantaneous_margin(const Snapshot& snapshot, const EnvelopeSpec& spec);

// Same, reporting which constraint attains the minimum.
double instantaneous_margin(const Snapshot& snapshot, const EnvelopeSpec& spec,
                            std::string& binding_constraint);

Snapshot snapshot_at(const Trace& trace, std::size_t index);

MarginReport trace_margin(const Trace& trace, const EnvelopeSpec& spec);

}  // namespace limtest
