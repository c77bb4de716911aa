#include "limtest/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "limtest/format.hpp"

namespace limtest {

double bumper_gap(double center_offset, double vehicle_length) {
    return center_offset >= 0.0 ? center_offset - vehicle_length
                                : center_offset + vehicle_length;
}

int lane_from_d(double d, const SimConfig& config) {
    const int lane = static_cast<int>(std::lround(d / config.lane_width));
    return std::clamp(lane, 0, config.lanes - 1);
}

double lane_center(int lane, const SimConfig& config) {
    return lane * config.lane_width;
}

namespace {

struct AgentDraft {
    double gap0 = 30.0;
    std::optional<double> v0;
    std::optional<double> dv0;
    std::optional<int> lane;
    std::optional<std::string> behavior;
    BrakeBehavior brake;
    CutInBehavior cutin;
    bool has_brake_param = false;
    bool has_cutin_param = false;
};

[[noreturn]] void unknown_binding(const std::string& name) {
    throw std::invalid_argument("unknown binding name: " + name);
}

double as_number(const std::string& name, const FixedValue& value) {
    if (!std::holds_alternative<double>(value)) {
        throw std::invalid_argument("binding " + name + " must be numeric");
    }
    return std::get<double>(value);
}

void apply_binding(const std::string& name, const FixedValue& value,
                   double& ego_v0, int& ego_lane,
                   std::map<std::string, AgentDraft>& drafts,
                   const SimConfig& config) {
    const auto dot = name.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= name.size()) {
        unknown_binding(name);
    }
    const std::string entity = name.substr(0, dot);
    const std::string prop = name.substr(dot + 1);

    if (entity == "ego") {
        if (prop == "v0") {
            ego_v0 = as_number(name, value);
        } else if (prop == "lane") {
            ego_lane = static_cast<int>(std::lround(as_number(name, value)));
        } else {
            unknown_binding(name);
        }
        return;
    }

    AgentDraft& draft = drafts[entity];
    if (prop == "gap0") {
        draft.gap0 = as_number(name, value);
    } else if (prop == "v0") {
        draft.v0 = as_number(name, value);
    } else if (prop == "dv0") {
        draft.dv0 = as_number(name, value);
    } else if (prop == "lane") {
        const int lane = static_cast<int>(std::lround(as_number(name, value)));
        if (lane < 0 || lane >= config.lanes) {
            throw std::invalid_argument("binding " + name + ": lane " +
                                        std::to_string(lane) + " outside road");
        }
        draft.lane = lane;
    } else if (prop == "behavior") {
        if (!std::holds_alternative<std::string>(value)) {
            throw std::invalid_argument("binding " + name + " must be a string");
        }
        draft.behavior = std::get<std::string>(value);
    } else if (prop == "brake.time") {
        draft.brake.time = as_number(name, value);
        draft.has_brake_param = true;
    } else if (prop == "brake.decel") {
        draft.brake.decel = as_number(name, value);
        draft.has_brake_param = true;
    } else if (prop == "brake.hold") {
        draft.brake.hold = as_number(name, value);
        draft.has_brake_param = true;
    } else if (prop == "cutin.time") {
        draft.cutin.time = as_number(name, value);
        draft.has_cutin_param = true;
    } else if (prop == "cutin.lane") {
        const int lane = static_cast<int>(std::lround(as_number(name, value)));
        if (lane < 0 || lane >= config.lanes) {
            throw std::invalid_argument("binding " + name + ": lane " +
                                        std::to_string(lane) + " outside road");
        }
        draft.cutin.target_lane = lane;
        draft.has_cutin_param = true;
    } else if (prop == "cutin.duration") {
        draft.cutin.duration = as_number(name, value);
        draft.has_cutin_param = true;
    } else {
        unknown_binding(name);
    }
}

Behavior resolve_behavior(const std::string& id, const AgentDraft& draft) {
    if (draft.behavior) {
        const std::string& b = *draft.behavior;
        if (b == "constant") return ConstantSpeed{};
        if (b == "brake") return draft.brake;
        if (b == "cutin") return draft.cutin;
        throw std::invalid_argument("agent " + id + ": unknown behavior '" + b +
                                    "'");
    }
    if (draft.has_brake_param && draft.has_cutin_param) {
        throw std::invalid_argument("agent " + id +
                                    ": both brake and cutin parameters bound; "
                                    "set <agent>.behavior explicitly");
    }
    if (draft.has_brake_param) return draft.brake;
    if (draft.has_cutin_param) return draft.cutin;
    return ConstantSpeed{};
}

void check_behavior(const std::string& id, const Behavior& behavior) {
    if (const auto* brake = std::get_if<BrakeBehavior>(&behavior)) {
        if (brake->time < 0 || brake->decel < 0 || brake->hold < 0) {
            throw std::invalid_argument("agent " + id +
                                        ": brake parameters must be nonnegative");
        }
    } else if (const auto* cutin = std::get_if<CutInBehavior>(&behavior)) {
        if (cutin->time < 0 || cutin->duration <= 0) {
            throw std::invalid_argument("agent " + id +
                                        ": cutin parameters must be positive");
        }
    }
}

double worst_overlap(const std::vector<VehicleState>& vehicles,
                     const SimConfig& config) {
    double worst = 0.0;
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        for (std::size_t j = i + 1; j < vehicles.size(); ++j) {
            if (std::abs(vehicles[i].d - vehicles[j].d) >= config.vehicle_width) {
                continue;
            }
            const double depth =
                config.vehicle_length - std::abs(vehicles[i].s - vehicles[j].s);
            worst = std::max(worst, depth);
        }
    }
    return worst;
}

}  // namespace

World build_world(const ConcreteScenario& scenario, const LogicalScenario& logical,
                  const SimConfig& config) {
    if (scenario.logical_id != logical.id) {
        throw std::invalid_argument("concrete scenario '" + scenario.logical_id +
                                    "' does not belong to logical scenario '" +
                                    logical.id + "'");
    }
    if (scenario.values.size() != logical.variables.size()) {
        throw std::invalid_argument("value count does not match variable count");
    }

    double ego_v0 = 25.0;
    int ego_lane = 0;
    std::map<std::string, AgentDraft> drafts;

    for (const auto& [name, value] : logical.fixed) {
        apply_binding(name, value, ego_v0, ego_lane, drafts, config);
    }
    for (std::size_t i = 0; i < logical.variables.size(); ++i) {
        apply_binding(logical.variables[i].name, scenario.values[i], ego_v0,
                      ego_lane, drafts, config);
    }
    if (ego_lane < 0 || ego_lane >= config.lanes) {
        throw std::invalid_argument("ego.lane outside road");
    }

    World world;
    world.config = config;
    world.ego.s = 0.0;
    world.ego.v = std::max(0.0, ego_v0);
    world.ego.lane = ego_lane;
    world.ego.d = lane_center(ego_lane, config);

    for (const auto& [id, draft] : drafts) {
        if (draft.v0 && draft.dv0) {
            throw std::invalid_argument("agent " + id +
                                        ": bind either v0 or dv0, not both");
        }
        TrafficAgent agent;
        agent.id = id;
        agent.initial.v = std::max(
            0.0, draft.v0 ? *draft.v0 : world.ego.v + draft.dv0.value_or(0.0));
        const int lane = draft.lane.value_or(ego_lane);
        agent.initial.lane = lane;
        agent.initial.d = lane_center(lane, config);
        // gap0 is bumper-to-bumper and signed (negative = behind the ego)
        agent.initial.s =
            world.ego.s + (draft.gap0 >= 0.0 ? draft.gap0 + config.vehicle_length
                                             : draft.gap0 - config.vehicle_length);
        agent.behavior = resolve_behavior(id, draft);
        check_behavior(id, agent.behavior);
        world.agents.push_back(std::move(agent));
    }

    world.agent_states.reserve(world.agents.size());
    for (const auto& agent : world.agents) {
        world.agent_states.push_back(agent.initial);
    }

    std::vector<VehicleState> all;
    all.push_back(world.ego);
    all.insert(all.end(), world.agent_states.begin(), world.agent_states.end());
    world.overlap_depth = worst_overlap(all, config);
    return world;
}

Observation observe(const World& world) {
    Observation obs;
    obs.ego = world.ego;
    obs.time = world.time;
    obs.neighbors.reserve(world.agents.size());
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        const VehicleState& st = world.agent_states[i];
        NeighborState n;
        n.id = world.agents[i].id;
        const double offset = st.s - world.ego.s;
        n.gap = bumper_gap(offset, world.config.vehicle_length);
        n.dv = st.v - world.ego.v;
        n.lane = st.lane;
        n.v = st.v;
        n.ahead = offset >= 0.0;
        obs.neighbors.push_back(std::move(n));
    }
    return obs;
}

void step(World& world, const Action& action) {
    const SimConfig& cfg = world.config;
    const double dt = cfg.dt;

    // ego longitudinal, explicit Euler: position first with the current speed
    const double a = std::clamp(action.a_cmd, cfg.a_min, cfg.a_max);
    world.ego.s += world.ego.v * dt;
    world.ego.v = std::max(0.0, world.ego.v + a * dt);
    world.ego.a = a;

    // lane-change request accepted only while no change is active
    if (action.lane_request && !world.ego_target_lane) {
        const int target = *action.lane_request;
        if (target >= 0 && target < cfg.lanes && target != world.ego.lane) {
            world.ego_target_lane = target;
        }
    }
    if (world.ego_target_lane) {
        const double center = lane_center(*world.ego_target_lane, cfg);
        const double remaining = center - world.ego.d;
        const double max_step = cfg.lat_speed * dt;
        if (std::abs(remaining) <= max_step) {
            world.ego.d = center;
            world.ego_target_lane.reset();
        } else {
            world.ego.d += remaining > 0 ? max_step : -max_step;
        }
    }
    world.ego.lane = lane_from_d(world.ego.d, cfg);

    // scripted agents (non-reactive)
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        VehicleState& st = world.agent_states[i];
        st.s += st.v * dt;
        st.a = 0.0;
        if (const auto* brake = std::get_if<BrakeBehavior>(&world.agents[i].behavior)) {
            if (world.time >= brake->time &&
                world.time < brake->time + brake->hold && st.v > 0.0) {
                st.a = -brake->decel;
                st.v = std::max(0.0, st.v - brake->decel * dt);
            }
        } else if (const auto* cutin =
                       std::get_if<CutInBehavior>(&world.agents[i].behavior)) {
            if (world.time >= cutin->time &&
                world.time < cutin->time + cutin->duration) {
                const double center = lane_center(cutin->target_lane, cfg);
                const double remaining_time =
                    cutin->time + cutin->duration - world.time;
                const double rate = (center - st.d) / remaining_time;
                st.d += rate * dt;
            } else if (world.time >= cutin->time + cutin->duration) {
                st.d = lane_center(cutin->target_lane, cfg);
            }
        }
        st.lane = lane_from_d(st.d, cfg);
    }

    world.time += dt;
}

Trace run_closed_loop(const ConcreteScenario& scenario,
                      const LogicalScenario& logical, Sut& sut,
                      const SimConfig& config) {
    World world = build_world(scenario, logical, config);
    const int steps = static_cast<int>(std::floor(config.horizon / config.dt + 1e-9));

    Trace trace;
    trace.config = config;
    trace.overlap_depth = world.overlap_depth;
    for (const auto& agent : world.agents) trace.agent_ids.push_back(agent.id);
    trace.agents.resize(world.agents.size());

    auto record = [&](int i) {
        trace.times.push_back(i * config.dt);
        trace.ego.push_back(world.ego);
        for (std::size_t k = 0; k < world.agents.size(); ++k) {
            trace.agents[k].push_back(world.agent_states[k]);
        }
        trace.ego_change_target.push_back(
            world.ego_target_lane ? *world.ego_target_lane : -1);
    };

    record(0);
    bool prev_declined = false;
    bool prev_aeb = false;
    for (int i = 1; i <= steps; ++i) {
        const Observation obs = observe(world);
        const Action action = sut.act(obs);

        if (action.aeb && !prev_aeb) {
            trace.sut_events.push_back({obs.time, "aeb-triggered"});
        }
        if (action.declined && !prev_declined) {
            trace.sut_events.push_back({obs.time, "lane-change-declined"});
        }
        prev_aeb = action.aeb;
        prev_declined = action.declined;

        const bool change_was_active = world.ego_target_lane.has_value();
        step(world, action);
        if (!change_was_active && world.ego_target_lane.has_value()) {
            trace.sut_events.push_back({obs.time, "lane-change-requested"});
        }
        world.time = i * config.dt;  // avoid accumulation drift
        record(i);
    }
    return trace;
}

void write_trace_csv(const Trace& trace, std::ostream& out,
                     const std::vector<double>* extra,
                     const std::string& extra_name) {
    out << "time,ego.s,ego.d,ego.v,ego.a,ego.lane";
    for (const auto& id : trace.agent_ids) {
        out << "," << id << ".s," << id << ".d," << id << ".v," << id << ".a,"
            << id << ".lane";
    }
    if (extra != nullptr) out << "," << extra_name;
    out << "\n";

    auto put = [&](const VehicleState& st) {
        out << "," << fmt_double(st.s) << "," << fmt_double(st.d) << ","
            << fmt_double(st.v) << "," << fmt_double(st.a) << "," << st.lane;
    };
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out << fmt_double(trace.times[i]);
        put(trace.ego[i]);
        for (const auto& agent : trace.agents) put(agent[i]);
        if (extra != nullptr) out << "," << fmt_double((*extra)[i]);
        out << "\n";
    }
}

}  // namespace limtest
