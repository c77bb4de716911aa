#include "limtest/fitness.hpp"

#include <algorithm>
#include <stdexcept>

namespace limtest {

namespace {

Snapshot initial_snapshot(const World& world) {
    Snapshot snap;
    snap.v_ego = world.ego.v;
    snap.d_ego = world.ego.d;
    snap.ego_lane = world.ego.lane;
    snap.neighbors.reserve(world.agents.size());
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        const VehicleState& st = world.agent_states[i];
        SnapshotNeighbor n;
        const double offset = st.s - world.ego.s;
        n.gap = bumper_gap(offset, world.config.vehicle_length);
        n.dv = st.v - world.ego.v;
        n.lane = st.lane;
        n.v = st.v;
        n.ahead = offset >= 0.0;
        snap.neighbors.push_back(n);
    }
    return snap;
}

std::size_t gap_variable_index(const LogicalScenario& logical,
                               const ObjectiveSpec& objective) {
    if (!objective.gap_variable.empty()) {
        for (std::size_t i = 0; i < logical.variables.size(); ++i) {
            if (logical.variables[i].name == objective.gap_variable) return i;
        }
        throw std::invalid_argument("gap variable '" + objective.gap_variable +
                                    "' not bound by scenario '" + logical.id + "'");
    }
    for (std::size_t i = 0; i < logical.variables.size(); ++i) {
        const std::string& name = logical.variables[i].name;
        if (name.size() >= 5 && name.compare(name.size() - 5, 5, ".gap0") == 0) {
            return i;
        }
    }
    throw std::invalid_argument("scenario '" + logical.id +
                                "' binds no target-lane gap variable");
}

}  // namespace

WorldValidity assess_world(const World& world, const EnvelopeSpec& envelope) {
    WorldValidity validity;
    validity.overlap_depth = world.overlap_depth;
    validity.start_margin = instantaneous_margin(initial_snapshot(world), envelope);
    return validity;
}

double shaping_penalty(const WorldValidity& validity, const ObjectiveSpec& objective) {
    if (validity.valid()) return 0.0;
    return objective.penalty +
           validity.overlap_depth / objective.overlap_normalizer +
           std::max(0.0, -validity.start_margin);
}

QualityValue evaluate_worst_case(const ConcreteScenario& scenario,
                                 const LogicalScenario& logical, const Sut& sut,
                                 const SimConfig& sim, const EnvelopeSpec& envelope,
                                 const ObjectiveSpec& objective) {
    World world = build_world(scenario, logical, sim);
    const WorldValidity validity = assess_world(world, envelope);
    const double penalty = shaping_penalty(validity, objective);

    QualityValue q;
    q.components["shaping"] = penalty;
    if (penalty > 0.0) {
        q.values.push_back(penalty);
        q.components["margin"] = 0.0;
        return q;
    }

    auto instance = sut.clone();
    const Trace trace = run_closed_loop(scenario, logical, *instance, sim);
    const MarginReport report = trace_margin(trace, envelope);
    q.values.push_back(report.m_star);
    q.components["margin"] = report.m_star;
    q.components["argmin_time"] = report.argmin_time;
    q.violated = report.violated;
    return q;
}

QualityValue evaluate_utilization(const ConcreteScenario& scenario,
                                  const LogicalScenario& logical, const Sut& sut,
                                  const SimConfig& sim, const EnvelopeSpec& envelope,
                                  const ObjectiveSpec& objective) {
    const std::size_t gap_index = gap_variable_index(logical, objective);
    const double offered_gap = scenario.values[gap_index];

    World world = build_world(scenario, logical, sim);
    const WorldValidity validity = assess_world(world, envelope);
    const double penalty = shaping_penalty(validity, objective);

    QualityValue q;
    q.components["shaping"] = penalty;
    if (penalty > 0.0) {
        q.values.push_back(penalty);
        return q;
    }

    auto instance = sut.clone();
    const Trace trace = run_closed_loop(scenario, logical, *instance, sim);
    bool declined = false;
    double decision_time = 0.0;
    for (const auto& event : trace.sut_events) {
        if (event.name == "lane-change-requested") {
            q.values.push_back(objective.penalty);
            q.components["accepted"] = 1.0;
            q.components["decision_time"] = event.time;
            return q;
        }
        if (!declined && event.name == "lane-change-declined") {
            declined = true;
            decision_time = event.time;
        }
    }
    if (declined) {
        q.values.push_back(-offered_gap);
        q.components["declined_gap"] = offered_gap;
        q.components["decision_time"] = decision_time;
    } else {
        // no opportunity was ever evaluated; treat like an acceptance
        q.values.push_back(objective.penalty);
        q.components["no_decision"] = 1.0;
    }
    return q;
}

QualityValue evaluate(const ConcreteScenario& scenario,
                      const LogicalScenario& logical, const Sut& sut,
                      const SimConfig& sim, const EnvelopeSpec& envelope,
                      const ObjectiveSpec& objective) {
    switch (objective.mode) {
        case ObjectiveMode::WorstCase:
            return evaluate_worst_case(scenario, logical, sut, sim, envelope,
                                       objective);
        case ObjectiveMode::Utilization:
            return evaluate_utilization(scenario, logical, sut, sim, envelope,
                                        objective);
        case ObjectiveMode::Multi: {
            QualityValue a = evaluate_worst_case(scenario, logical, sut, sim,
                                                 envelope, objective);
            QualityValue b = evaluate_utilization(scenario, logical, sut, sim,
                                                  envelope, objective);
            QualityValue q;
            q.values = {a.scalar(), b.scalar()};
            q.components = a.components;
            for (const auto& [key, value] : b.components) {
                q.components["util_" + key] = value;
            }
            q.violated = a.violated;
            return q;
        }
    }
    throw std::logic_error("unreachable objective mode");
}

}  // namespace limtest
