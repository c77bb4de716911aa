#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "limtest/simulation.hpp"

using namespace limtest;

namespace {

// Controller that always outputs the same command; used to isolate the plant.
class FixedSut : public Sut {
public:
    explicit FixedSut(Action action = {}) : action_(action) {}
    Action act(const Observation&) override { return action_; }
    std::unique_ptr<Sut> clone() const override {
        return std::make_unique<FixedSut>(*this);
    }

private:
    Action action_;
};

LogicalScenario single_lead() {
    LogicalScenario s;
    s.id = "single-lead";
    s.fixed.emplace("agent1.dv0", 0.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    s.variables.push_back({"agent1.gap0", "m", -100.0, 100.0});
    return s;
}

bool states_equal(const VehicleState& a, const VehicleState& b) {
    return a.s == b.s && a.d == b.d && a.v == b.v && a.a == b.a && a.lane == b.lane;
}

}  // namespace

TEST_CASE("bumper gap is signed and symmetric around the vehicle length") {
    CHECK(bumper_gap(34.5, 4.5) == doctest::Approx(30.0));
    CHECK(bumper_gap(-34.5, 4.5) == doctest::Approx(-30.0));
    CHECK(bumper_gap(0.0, 4.5) == doctest::Approx(-4.5));  // fully overlapping
}

TEST_CASE("lane mapping rounds to the nearest center and clamps to the road") {
    SimConfig cfg;  // 2 lanes, width 3.5
    CHECK(lane_from_d(0.0, cfg) == 0);
    CHECK(lane_from_d(1.7, cfg) == 0);
    CHECK(lane_from_d(1.8, cfg) == 1);
    CHECK(lane_from_d(9.0, cfg) == 1);
    CHECK(lane_from_d(-5.0, cfg) == 0);
    CHECK(lane_center(1, cfg) == doctest::Approx(3.5));
}

TEST_CASE("bindings place the ego and agents") {
    const auto logical = single_lead();
    SimConfig cfg;
    const World w = build_world({"single-lead", {20.0, 30.0}}, logical, cfg);
    CHECK(w.ego.v == doctest::Approx(20.0));
    CHECK(w.ego.s == 0.0);
    REQUIRE(w.agents.size() == 1);
    // gap0 = 30 bumper-to-bumper => center offset 34.5
    CHECK(w.agent_states[0].s == doctest::Approx(34.5));
    CHECK(w.agent_states[0].v == doctest::Approx(20.0));  // dv0 = 0
    CHECK(w.overlap_depth == 0.0);
}

TEST_CASE("negative gap places the agent behind the ego") {
    const auto logical = single_lead();
    const World w = build_world({"single-lead", {20.0, -30.0}}, logical, SimConfig{});
    CHECK(w.agent_states[0].s == doctest::Approx(-34.5));
}

TEST_CASE("unknown binding names are rejected") {
    LogicalScenario s;
    s.id = "bad";
    s.variables.push_back({"ego.vel0", "m/s", 0.0, 40.0});
    CHECK_THROWS_WITH_AS(build_world({"bad", {20.0}}, s, SimConfig{}),
                         doctest::Contains("ego.vel0"), std::invalid_argument);
    s.variables[0].name = "agent1.gap";
    CHECK_THROWS_AS(build_world({"bad", {20.0}}, s, SimConfig{}),
                    std::invalid_argument);
}

TEST_CASE("v0 and dv0 are mutually exclusive per agent") {
    LogicalScenario s;
    s.id = "bad";
    s.fixed.emplace("agent1.v0", 20.0);
    s.fixed.emplace("agent1.dv0", -5.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    CHECK_THROWS_AS(build_world({"bad", {20.0}}, s, SimConfig{}),
                    std::invalid_argument);
}

TEST_CASE("overlapping initial placement is recorded, not rejected") {
    LogicalScenario s;
    s.id = "tight";
    s.fixed.emplace("agent1.gap0", 10.0);
    s.fixed.emplace("agent2.gap0", 11.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    const World w = build_world({"tight", {20.0}}, s, SimConfig{});
    // agent centers 1 m apart, vehicle length 4.5 => depth 3.5
    CHECK(w.overlap_depth == doctest::Approx(3.5));
}

TEST_CASE("behavior inference from bound parameters") {
    LogicalScenario s;
    s.id = "b";
    s.fixed.emplace("agent1.brake.decel", 6.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    World w = build_world({"b", {20.0}}, s, SimConfig{});
    CHECK(std::holds_alternative<BrakeBehavior>(w.agents[0].behavior));

    s.fixed.emplace("agent1.cutin.time", 2.0);
    CHECK_THROWS_AS(build_world({"b", {20.0}}, s, SimConfig{}),
                    std::invalid_argument);  // ambiguous without explicit tag

    s.fixed.emplace("agent1.behavior", std::string("cutin"));
    w = build_world({"b", {20.0}}, s, SimConfig{});
    CHECK(std::holds_alternative<CutInBehavior>(w.agents[0].behavior));
}

TEST_CASE("one Euler step moves position with the pre-step speed") {
    const auto logical = single_lead();
    World w = build_world({"single-lead", {10.0, 50.0}}, logical, SimConfig{});
    Action a;
    a.a_cmd = 0.0;
    step(w, a);
    CHECK(w.ego.s == doctest::Approx(0.1));  // 10 m/s * 0.01 s
    CHECK(w.ego.v == doctest::Approx(10.0));
}

TEST_CASE("commands are clamped to the configured capability") {
    SimConfig cfg;
    cfg.a_min = -9.0;
    const auto logical = single_lead();
    World w = build_world({"single-lead", {10.0, 50.0}}, logical, cfg);
    Action a;
    a.a_cmd = -20.0;
    step(w, a);
    CHECK(w.ego.a == doctest::Approx(-9.0));
    a.a_cmd = 50.0;
    step(w, a);
    CHECK(w.ego.a == doctest::Approx(cfg.a_max));
}

TEST_CASE("speed never becomes negative under full braking") {
    const auto logical = single_lead();
    World w = build_world({"single-lead", {1.0, 50.0}}, logical, SimConfig{});
    Action a;
    a.a_cmd = -100.0;
    for (int i = 0; i < 100; ++i) {
        step(w, a);
        CHECK(w.ego.v >= 0.0);
    }
    CHECK(w.ego.v == 0.0);
}

TEST_CASE("trace has floor(horizon/dt)+1 samples with drift-free times") {
    SimConfig cfg;
    cfg.horizon = 10.0;
    const auto logical = single_lead();
    FixedSut sut;
    const Trace t = run_closed_loop({"single-lead", {20.0, 30.0}}, logical, sut, cfg);
    REQUIRE(t.times.size() == 1001);
    CHECK(t.times[1000] == 1000 * cfg.dt);  // exact product, no accumulation
    CHECK(t.ego.size() == t.times.size());
    REQUIRE(t.agents.size() == 1);
    CHECK(t.agents[0].size() == t.times.size());
}

TEST_CASE("closed-form check: equal speeds keep the gap constant") {
    const auto logical = single_lead();
    FixedSut sut;  // a_cmd = 0
    const Trace t = run_closed_loop({"single-lead", {20.0, 30.0}}, logical, sut,
                                    SimConfig{});
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        const double gap = bumper_gap(t.agents[0][i].s - t.ego[i].s,
                                      t.config.vehicle_length);
        CHECK(gap == doctest::Approx(30.0).epsilon(1e-9));
    }
}

TEST_CASE("braking agent follows its schedule and stops at zero") {
    LogicalScenario s;
    s.id = "brake";
    s.fixed.emplace("agent1.gap0", 40.0);
    s.fixed.emplace("agent1.v0", 10.0);
    s.fixed.emplace("agent1.behavior", std::string("brake"));
    s.fixed.emplace("agent1.brake.time", 1.0);
    s.fixed.emplace("agent1.brake.decel", 5.0);
    s.fixed.emplace("agent1.brake.hold", 60.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    FixedSut sut;
    const Trace t = run_closed_loop({"brake", {0.0}}, s, sut, SimConfig{});

    auto v_at = [&](double time) {
        return t.agents[0][static_cast<std::size_t>(std::lround(time / 0.01))].v;
    };
    CHECK(v_at(0.5) == doctest::Approx(10.0));          // before onset
    CHECK(v_at(2.0) == doctest::Approx(5.0).epsilon(1e-6));  // 1 s of -5 m/s^2
    CHECK(v_at(3.5) == 0.0);                            // stopped, stays stopped
    CHECK(v_at(14.0) == 0.0);
}

TEST_CASE("cut-in agent reaches the target lane center after its window") {
    LogicalScenario s;
    s.id = "cutin";
    s.fixed.emplace("agent1.gap0", 20.0);
    s.fixed.emplace("agent1.lane", 1.0);
    s.fixed.emplace("agent1.dv0", 0.0);
    s.fixed.emplace("agent1.behavior", std::string("cutin"));
    s.fixed.emplace("agent1.cutin.time", 1.0);
    s.fixed.emplace("agent1.cutin.lane", 0.0);
    s.fixed.emplace("agent1.cutin.duration", 2.0);
    s.variables.push_back({"ego.v0", "m/s", 0.0, 40.0});
    FixedSut sut;
    const Trace t = run_closed_loop({"cutin", {20.0}}, s, sut, SimConfig{});
    CHECK(t.agents[0][0].d == doctest::Approx(3.5));
    CHECK(t.agents[0][50].d == doctest::Approx(3.5));    // still in lane 1 at 0.5 s
    const std::size_t after = 320;                       // 3.2 s > time + duration
    CHECK(t.agents[0][after].d == doctest::Approx(0.0));
    CHECK(t.agents[0][after].lane == 0);
}

TEST_CASE("lane-change request moves the ego to the target center") {
    const auto logical = single_lead();
    Action a;
    a.a_cmd = 0.0;
    a.lane_request = 1;
    FixedSut sut(a);
    const Trace t = run_closed_loop({"single-lead", {20.0, 30.0}}, logical, sut,
                                    SimConfig{});
    // 3.5 m at 1.5 m/s lateral speed: done after ~2.34 s
    CHECK(t.ego[0].d == 0.0);
    CHECK(t.ego.back().d == doctest::Approx(3.5));
    CHECK(t.ego.back().lane == 1);
    CHECK(t.ego_change_target[1] == 1);
    CHECK(t.ego_change_target.back() == -1);  // completed
    // exactly one accepted request recorded
    int requests = 0;
    for (const auto& e : t.sut_events) {
        if (e.name == "lane-change-requested") ++requests;
    }
    CHECK(requests == 1);
}

TEST_CASE("property: identical runs are bitwise identical") {
    std::mt19937_64 rng(3);
    const auto logical = single_lead();
    std::uniform_real_distribution<double> speed(0.0, 40.0);
    std::uniform_real_distribution<double> gap(-100.0, 100.0);
    SimConfig cfg;
    cfg.horizon = 2.0;
    for (int iter = 0; iter < 50; ++iter) {
        const ConcreteScenario c{"single-lead", {speed(rng), gap(rng)}};
        FixedSut sut;
        const Trace t1 = run_closed_loop(c, logical, sut, cfg);
        const Trace t2 = run_closed_loop(c, logical, sut, cfg);
        REQUIRE(t1.times.size() == t2.times.size());
        for (std::size_t i = 0; i < t1.times.size(); ++i) {
            CHECK(states_equal(t1.ego[i], t2.ego[i]));
            CHECK(states_equal(t1.agents[0][i], t2.agents[0][i]));
        }
    }
}

TEST_CASE("property: traces satisfy the update equations exactly") {
    std::mt19937_64 rng(5);
    const auto logical = single_lead();
    std::uniform_real_distribution<double> speed(0.0, 40.0);
    std::uniform_real_distribution<double> gap(-100.0, 100.0);
    std::uniform_real_distribution<double> cmd(-15.0, 5.0);
    SimConfig cfg;
    cfg.horizon = 1.0;
    int checked = 0;
    for (int iter = 0; iter < 20; ++iter) {
        Action a;
        a.a_cmd = cmd(rng);
        FixedSut sut(a);
        const ConcreteScenario c{"single-lead", {speed(rng), gap(rng)}};
        const Trace t = run_closed_loop(c, logical, sut, cfg);
        for (std::size_t i = 1; i < t.times.size(); ++i) {
            // s advances with the pre-step speed; v integrates the applied
            // acceleration, floored at zero
            CHECK(t.ego[i].s == t.ego[i - 1].s + t.ego[i - 1].v * cfg.dt);
            CHECK(t.ego[i].v ==
                  std::max(0.0, t.ego[i - 1].v + t.ego[i].a * cfg.dt));
            CHECK(t.ego[i].v >= 0.0);
            CHECK(t.agents[0][i].s ==
                  t.agents[0][i - 1].s + t.agents[0][i - 1].v * cfg.dt);
            CHECK(t.agents[0][i].v == t.agents[0][i - 1].v);  // constant speed
            ++checked;
        }
    }
    CHECK(checked >= 1000);
}

TEST_CASE("observation mirrors the world symmetrically") {
    const auto logical = single_lead();
    const World w = build_world({"single-lead", {20.0, 30.0}}, logical, SimConfig{});
    const Observation obs = observe(w);
    REQUIRE(obs.neighbors.size() == 1);
    CHECK(obs.neighbors[0].id == "agent1");
    CHECK(obs.neighbors[0].gap == doctest::Approx(30.0));
    CHECK(obs.neighbors[0].dv == doctest::Approx(0.0));
    CHECK(obs.neighbors[0].ahead);

    const World behind =
        build_world({"single-lead", {20.0, -30.0}}, logical, SimConfig{});
    const Observation obs2 = observe(behind);
    CHECK(obs2.neighbors[0].gap == doctest::Approx(-30.0));
    CHECK_FALSE(obs2.neighbors[0].ahead);
}

TEST_CASE("trace CSV has a header plus one row per sample") {
    const auto logical = single_lead();
    FixedSut sut;
    SimConfig cfg;
    cfg.horizon = 0.1;
    const Trace t = run_closed_loop({"single-lead", {20.0, 30.0}}, logical, sut, cfg);
    std::ostringstream out;
    std::vector<double> extra(t.times.size(), 0.5);
    write_trace_csv(t, out, &extra, "margin");
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,ego.s,ego.d,ego.v,ego.a,ego.lane,"
                  "agent1.s,agent1.d,agent1.v,agent1.a,agent1.lane,margin");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(t.times.size()));
}
