#include "limtest/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace limtest {

ValidationReport validate_logical(const LogicalScenario& scenario) {
    ValidationReport report;
    if (scenario.id.empty()) {
        report.violations.push_back("scenario id is empty");
    }
    if (scenario.variables.empty()) {
        report.violations.push_back("no variables (n = 0)");
    }
    std::set<std::string> seen;
    for (const auto& var : scenario.variables) {
        if (var.name.empty()) {
            report.violations.push_back("variable with empty name");
        }
        if (!seen.insert(var.name).second) {
            report.violations.push_back("duplicate name: " + var.name);
        }
        if (scenario.fixed.count(var.name) != 0) {
            report.violations.push_back("variable shadows fixed context: " + var.name);
        }
        if (!std::isfinite(var.lo) || !std::isfinite(var.hi)) {
            report.violations.push_back("non-finite interval for " + var.name);
        } else if (!(var.lo < var.hi)) {
            report.violations.push_back("empty interval for " + var.name + " [" +
                                        std::to_string(var.lo) + "," +
                                        std::to_string(var.hi) + "]");
        }
    }
    return report;
}

SearchSpace search_space(const LogicalScenario& scenario) {
    const auto report = validate_logical(scenario);
    if (!report.ok()) {
        std::ostringstream oss;
        oss << "invalid logical scenario '" << scenario.id << "':";
        for (const auto& v : report.violations) oss << " " << v << ";";
        throw std::invalid_argument(oss.str());
    }
    SearchSpace space;
    space.bounds.reserve(scenario.variables.size());
    for (const auto& var : scenario.variables) {
        space.bounds.push_back({var.lo, var.hi});
    }
    return space;
}

ConcreteScenario instantiate(const LogicalScenario& scenario,
                             std::vector<double> values) {
    if (values.size() != scenario.variables.size()) {
        throw std::invalid_argument(
            "value count " + std::to_string(values.size()) + " does not match " +
            std::to_string(scenario.variables.size()) + " variables of '" +
            scenario.id + "'");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& var = scenario.variables[i];
        if (!(values[i] >= var.lo && values[i] <= var.hi)) {
            std::ostringstream oss;
            oss << "value " << values[i] << " out of bounds at index " << i
                << " (" << var.name << " in [" << var.lo << "," << var.hi << "])";
            throw std::invalid_argument(oss.str());
        }
    }
    return ConcreteScenario{scenario.id, std::move(values)};
}

std::vector<double> project(const SearchSpace& space, std::vector<double> point) {
    if (point.size() != space.dims()) {
        throw std::invalid_argument("point dimension " + std::to_string(point.size()) +
                                    " does not match search space dimension " +
                                    std::to_string(space.dims()));
    }
    for (std::size_t i = 0; i < point.size(); ++i) {
        point[i] = std::clamp(point[i], space.bounds[i][0], space.bounds[i][1]);
    }
    return point;
}

LogicalScenario scenario_from_json(const nlohmann::json& j) {
    LogicalScenario s;
    s.id = j.at("id").get<std::string>();
    s.description = j.value("description", std::string{});
    if (j.contains("fixed")) {
        for (const auto& [key, value] : j.at("fixed").items()) {
            if (value.is_string()) {
                s.fixed.emplace(key, value.get<std::string>());
            } else if (value.is_number()) {
                s.fixed.emplace(key, value.get<double>());
            } else {
                throw std::runtime_error("fixed entry '" + key +
                                         "' must be a number or a string");
            }
        }
    }
    for (const auto& jv : j.at("variables")) {
        VariableSpec var;
        var.name = jv.at("name").get<std::string>();
        var.unit = jv.value("unit", std::string{});
        const auto& interval = jv.at("interval");
        if (!interval.is_array() || interval.size() != 2) {
            throw std::runtime_error("variable '" + var.name +
                                     "' interval must be [lo, hi]");
        }
        var.lo = interval[0].get<double>();
        var.hi = interval[1].get<double>();
        s.variables.push_back(std::move(var));
    }
    if (j.contains("metadata")) {
        for (const auto& [key, value] : j.at("metadata").items()) {
            s.metadata.emplace(key, value.is_string()
                                        ? value.get<std::string>()
                                        : value.dump());
        }
    }
    return s;
}

nlohmann::json scenario_to_json(const LogicalScenario& scenario) {
    nlohmann::json j;
    j["id"] = scenario.id;
    j["description"] = scenario.description;
    j["fixed"] = nlohmann::json::object();
    for (const auto& [key, value] : scenario.fixed) {
        if (std::holds_alternative<double>(value)) {
            j["fixed"][key] = std::get<double>(value);
        } else {
            j["fixed"][key] = std::get<std::string>(value);
        }
    }
    j["variables"] = nlohmann::json::array();
    for (const auto& var : scenario.variables) {
        j["variables"].push_back({{"name", var.name},
                                  {"unit", var.unit},
                                  {"interval", {var.lo, var.hi}}});
    }
    j["metadata"] = nlohmann::json::object();
    for (const auto& [key, value] : scenario.metadata) {
        j["metadata"][key] = value;
    }
    return j;
}

LogicalScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read scenario file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
        return scenario_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("cannot parse scenario file " + path + ": " +
                                 e.what());
    }
}

void save_scenario(const LogicalScenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write scenario file: " + path);
    }
    out << scenario_to_json(scenario).dump(2) << "\n";
}

}  // namespace limtest
