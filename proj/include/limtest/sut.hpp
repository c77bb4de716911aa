#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace limtest {

struct VehicleState {
    double s = 0.0;   // longitudinal position of the vehicle center (m)
    double d = 0.0;   // lateral position, 0 = center of lane 0 (m)
    double v = 0.0;   // longitudinal speed (m/s), never negative
    double a = 0.0;   // longitudinal acceleration (m/s^2)
    int lane = 0;     // derived from d
};

// Relative view of one traffic agent as seen from the ego vehicle.
struct NeighborState {
    std::string id;
    double gap = 0.0;   // signed bumper-to-bumper gap (m), negative = behind
    double dv = 0.0;    // v_agent - v_ego (m/s)
    int lane = 0;
    double v = 0.0;
    bool ahead = false;  // center ahead of ego center
};

struct Observation {
    VehicleState ego;
    std::vector<NeighborState> neighbors;
    double time = 0.0;
};

struct Action {
    double a_cmd = 0.0;
    std::optional<int> lane_request;
    bool declined = false;  // lane-change opportunity evaluated and rejected
    bool aeb = false;       // emergency braking engaged
};

// Per-step black-box controller. One instance per concurrent run.
class Sut {
public:
    virtual ~Sut() = default;
    virtual Action act(const Observation& obs) = 0;
    virtual std::unique_ptr<Sut> clone() const = 0;
};

struct AccParams {
    double tau = 1.0;       // target time gap (s)
    double d0 = 2.0;        // target standstill gap (m)
    double v_set = 30.0;    // free-flow set speed (m/s)
    double kp = 0.5;
    double kv = 1.0;
    double ttc_aeb = 2.5;   // full braking below this time-to-collision (s)
    double sensor_range = 200.0;
    double a_min = -12.0;   // command clamp (m/s^2)
    double a_max = 3.0;
};

struct LaneChangeParams {
    int target_lane = 1;          // standing goal lane
    double g_front_min = 20.0;    // required front gap on the target lane (m)
    double g_rear_min = 15.0;     // required rear gap on the target lane (m)
};

// Gap-law ACC with free-flow speed tracking and TTC-triggered emergency brake.
Action acc_reference(const Observation& obs, const AccParams& params);

// Same law with kv forced to 0 and the emergency brake disabled.
Action acc_flawed(const Observation& obs, const AccParams& params);

// Requests the lane change iff both target-lane gaps exceed their thresholds,
// otherwise sets the declined flag. Vacuous gaps count as +infinity.
Action lane_change_decider(const Observation& obs, const LaneChangeParams& params);

class AccSut : public Sut {
public:
    AccSut(AccParams params, bool flawed) : params_(params), flawed_(flawed) {}
    Action act(const Observation& obs) override {
        return flawed_ ? acc_flawed(obs, params_) : acc_reference(obs, params_);
    }
    std::unique_ptr<Sut> clone() const override {
        return std::make_unique<AccSut>(*this);
    }

private:
    AccParams params_;
    bool flawed_;
};

// ACC longitudinal control plus a standing lane-change goal handled by the
// gap-acceptance decider. Stops deciding once the goal lane is reached.
class LaneChangeSut : public Sut {
public:
    LaneChangeSut(AccParams acc, LaneChangeParams lc) : acc_(acc), lc_(lc) {}
    Action act(const Observation& obs) override;
    std::unique_ptr<Sut> clone() const override {
        return std::make_unique<LaneChangeSut>(*this);
    }

private:
    AccParams acc_;
    LaneChangeParams lc_;
    bool requested_ = false;
};

}  // namespace limtest
