#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "limtest/scenario.hpp"
#include "limtest/sut.hpp"

namespace limtest {

struct ConstantSpeed {};

struct BrakeBehavior {
    double time = 1.0;    // brake onset (s)
    double decel = 4.0;   // m/s^2
    double hold = 60.0;   // braking window length (s)
};

struct CutInBehavior {
    double time = 1.0;      // maneuver start (s)
    int target_lane = 0;
    double duration = 2.0;  // lateral motion window (s)
};

using Behavior = std::variant<ConstantSpeed, BrakeBehavior, CutInBehavior>;

struct TrafficAgent {
    std::string id;
    VehicleState initial;
    Behavior behavior;
};

struct SimConfig {
    double dt = 0.01;           // s
    double horizon = 15.0;      // s
    int lanes = 2;
    double lane_width = 3.5;    // m
    double a_min = -12.0;       // ego capability (m/s^2)
    double a_max = 3.0;
    double lat_speed = 1.5;     // lane-change lateral speed (m/s)
    double vehicle_length = 4.5;
    double vehicle_width = 1.8;
    double sensor_range = 200.0;
};

struct World {
    SimConfig config;
    VehicleState ego;
    std::vector<TrafficAgent> agents;        // initial states, sorted by id
    std::vector<VehicleState> agent_states;  // current states
    std::optional<int> ego_target_lane;      // active lane change
    double time = 0.0;
    double overlap_depth = 0.0;  // worst initial bumper overlap (m), 0 = clean
};

struct TraceEvent {
    double time = 0.0;
    std::string name;
};

struct Trace {
    SimConfig config;
    std::vector<double> times;
    std::vector<VehicleState> ego;
    std::vector<std::string> agent_ids;
    std::vector<std::vector<VehicleState>> agents;  // [agent][sample]
    std::vector<int> ego_change_target;             // -1 = no lane change active
    std::vector<TraceEvent> sut_events;
    double overlap_depth = 0.0;
};

// Signed bumper-to-bumper gap from the center offset of two equal-length
// vehicles; positive = other ahead.
double bumper_gap(double center_offset, double vehicle_length);

int lane_from_d(double d, const SimConfig& config);
double lane_center(int lane, const SimConfig& config);

// Bind fixed context and variable values to simulator entities. Recognized
// bindings (ego / one block per agent id):
//   ego.v0, ego.lane
//   <agent>.gap0, <agent>.v0, <agent>.dv0, <agent>.lane, <agent>.behavior,
//   <agent>.brake.time, <agent>.brake.decel, <agent>.brake.hold,
//   <agent>.cutin.time, <agent>.cutin.lane, <agent>.cutin.duration
// Unknown names throw std::invalid_argument. Overlapping initial placements
// are not an error; they are recorded in World::overlap_depth.
World build_world(const ConcreteScenario& scenario, const LogicalScenario& logical,
                  const SimConfig& config);

Observation observe(const World& world);

void step(World& world, const Action& action);

// Deterministic fixed-step closed loop; the SUT is queried once per step.
Trace run_closed_loop(const ConcreteScenario& scenario,
                      const LogicalScenario& logical, Sut& sut,
                      const SimConfig& config);

// One row per sample: time, then s/d/v/a/lane per vehicle; optional extra
// column appended (used for the margin curve).
void write_trace_csv(const Trace& trace, std::ostream& out,
                     const std::vector<double>* extra = nullptr,
                     const std::string& extra_name = "margin");

}  // namespace limtest
