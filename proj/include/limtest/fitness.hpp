#pragma once

#include <map>
#include <string>
#include <vector>

#include "limtest/envelope.hpp"
#include "limtest/scenario.hpp"
#include "limtest/simulation.hpp"
#include "limtest/sut.hpp"

namespace limtest {

// Quality assigned to one concrete scenario. Lower = worse SUT behavior; the
// optimizer minimizes, so the worst case is the global minimum.
struct QualityValue {
    std::vector<double> values;  // size 1 in the scalar modes
    std::map<std::string, double> components;
    bool violated = false;

    double scalar() const { return values.front(); }
};

enum class ObjectiveMode { WorstCase, Utilization, Multi };

struct ObjectiveSpec {
    ObjectiveMode mode = ObjectiveMode::WorstCase;
    double penalty = 3.0;             // P, must stay > 2 (margins are in [-1,1])
    double overlap_normalizer = 10.0;  // m
    std::string gap_variable;  // utilization: variable holding the offered gap
};

// Scenario well-formedness as seen by the shaping term: clean placement and a
// start state inside the envelope.
struct WorldValidity {
    double overlap_depth = 0.0;   // m, 0 = no overlap
    double start_margin = 1.0;    // instantaneous margin at t = 0

    bool valid() const { return overlap_depth <= 0.0 && start_margin >= 0.0; }
};

WorldValidity assess_world(const World& world, const EnvelopeSpec& envelope);

// 0 for valid scenarios, else penalty + a violation measure that shrinks
// continuously as the scenario approaches validity.
double shaping_penalty(const WorldValidity& validity, const ObjectiveSpec& objective);

QualityValue evaluate_worst_case(const ConcreteScenario& scenario,
                                 const LogicalScenario& logical, const Sut& sut,
                                 const SimConfig& sim, const EnvelopeSpec& envelope,
                                 const ObjectiveSpec& objective);

// Quality of a declined opportunity: -gap when the SUT declined the lane
// change, +P when it accepted, so minimizing finds the largest declined gap.
QualityValue evaluate_utilization(const ConcreteScenario& scenario,
                                  const LogicalScenario& logical, const Sut& sut,
                                  const SimConfig& sim, const EnvelopeSpec& envelope,
                                  const ObjectiveSpec& objective);

// Dispatch on objective.mode; Multi yields (worst-case, utilization).
QualityValue evaluate(const ConcreteScenario& scenario,
                      const LogicalScenario& logical, const Sut& sut,
                      const SimConfig& sim, const EnvelopeSpec& envelope,
                      const ObjectiveSpec& objective);

}  // namespace limtest
