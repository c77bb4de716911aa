#pragma once

#include <array>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace limtest {

// A fixed-context entry is either a numeric value or a tag interpreted by the
// simulator bindings (e.g. a behavior name).
using FixedValue = std::variant<double, std::string>;

struct VariableSpec {
    std::string name;
    std::string unit;
    double lo = 0.0;
    double hi = 0.0;
};

// Parameterized scenario family: fixed context, named variables, one closed
// interval per variable. The variable order defines the coordinate order of
// the search space.
struct LogicalScenario {
    std::string id;
    std::string description;
    std::map<std::string, FixedValue> fixed;
    std::vector<VariableSpec> variables;
    std::map<std::string, std::string> metadata;
};

// Axis-aligned box spanned by the variable intervals.
struct SearchSpace {
    std::vector<std::array<double, 2>> bounds;

    std::size_t dims() const { return bounds.size(); }
};

// One assignment of values to all variables of a logical scenario.
struct ConcreteScenario {
    std::string logical_id;
    std::vector<double> values;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_logical(const LogicalScenario& scenario);

// Throws std::invalid_argument if the scenario does not validate.
SearchSpace search_space(const LogicalScenario& scenario);

// Throws std::invalid_argument on length mismatch or out-of-bounds values
// (intervals are closed, boundary values are accepted).
ConcreteScenario instantiate(const LogicalScenario& scenario,
                             std::vector<double> values);

// Clamp every coordinate into its interval. Idempotent.
std::vector<double> project(const SearchSpace& space, std::vector<double> point);

LogicalScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const LogicalScenario& scenario);

// Throws std::runtime_error if the file cannot be read or parsed.
LogicalScenario load_scenario(const std::string& path);
void save_scenario(const LogicalScenario& scenario, const std::string& path);

}  // namespace limtest
