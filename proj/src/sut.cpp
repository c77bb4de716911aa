#include "limtest/sut.hpp"

#include <algorithm>
#include <cmath>

#include "limtest/envelope.hpp"

namespace limtest {

namespace {

const NeighborState* find_lead(const Observation& obs, double sensor_range) {
    const NeighborState* lead = nullptr;
    for (const auto& n : obs.neighbors) {
        if (!n.ahead || n.lane != obs.ego.lane) continue;
        if (n.gap > sensor_range) continue;
        if (lead == nullptr || n.gap < lead->gap) lead = &n;
    }
    return lead;
}

}  // namespace

Action acc_reference(const Observation& obs, const AccParams& params) {
    Action action;
    const NeighborState* lead = find_lead(obs, params.sensor_range);
    if (lead == nullptr) {
        action.a_cmd = params.kp * (params.v_set - obs.ego.v);
    } else {
        const double g_star = params.d0 + params.tau * obs.ego.v;
        action.a_cmd = params.kp * (lead->gap - g_star) + params.kv * lead->dv;
        const double closing = -lead->dv;
        if (ttc(lead->gap, closing) < params.ttc_aeb) {
            action.a_cmd = params.a_min;
            action.aeb = true;
        }
    }
    action.a_cmd = std::clamp(action.a_cmd, params.a_min, params.a_max);
    return action;
}

Action acc_flawed(const Observation& obs, const AccParams& params) {
    AccParams p = params;
    p.kv = 0.0;
    p.ttc_aeb = 0.0;  // ttc() is nonnegative, so the brake never triggers
    return acc_reference(obs, p);
}

Action lane_change_decider(const Observation& obs, const LaneChangeParams& params) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    double front = kInf;
    double rear = kInf;
    for (const auto& n : obs.neighbors) {
        if (n.lane != params.target_lane) continue;
        if (n.ahead) {
            front = std::min(front, n.gap);
        } else {
            rear = std::min(rear, -n.gap);
        }
    }
    Action action;
    if (front >= params.g_front_min && rear >= params.g_rear_min) {
        action.lane_request = params.target_lane;
    } else {
        action.declined = true;
    }
    return action;
}

Action LaneChangeSut::act(const Observation& obs) {
    Action action = acc_reference(obs, acc_);
    if (!requested_ && obs.ego.lane != lc_.target_lane) {
        Action decision = lane_change_decider(obs, lc_);
        action.lane_request = decision.lane_request;
        action.declined = decision.declined;
        if (decision.lane_request) requested_ = true;
    }
    return action;
}

}  // namespace limtest
