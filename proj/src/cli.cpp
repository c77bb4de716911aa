#include "limtest/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "limtest/campaign.hpp"
#include "limtest/plot.hpp"
#include "limtest/scenario.hpp"

namespace limtest {

namespace {

int cmd_validate(const std::vector<std::string>& paths) {
    bool all_ok = true;
    for (const auto& path : paths) {
        const LogicalScenario scenario = load_scenario(path);  // throws -> exit 2
        const ValidationReport report = validate_logical(scenario);
        if (report.ok()) {
            std::cout << path << ": ok (" << scenario.variables.size()
                      << " variables)\n";
        } else {
            all_ok = false;
            std::cout << path << ": INVALID\n";
            for (const auto& violation : report.violations) {
                std::cout << "  - " << violation << "\n";
            }
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::optional<std::uint64_t> seed_override, int jobs_override) {
    CampaignConfig config;
    try {
        config = load_campaign_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (!out_override.empty()) {
        config.output_dir = out_override;
    } else if (const char* env = std::getenv("LIMTEST_OUT")) {
        config.output_dir = env;
    }
    if (seed_override) config.seeds = {*seed_override};
    if (jobs_override > 0) config.jobs = jobs_override;

    const auto records = run_campaign(config);
    bool any_violated = false;
    bool any_failed = false;
    for (const auto& record : records) {
        if (!record.ok) {
            any_failed = true;
            std::cout << record.logical_id << ": FAILED (" << record.error << ")\n";
            continue;
        }
        std::cout << record.logical_id << ": m* = " << record.m_star
                  << (record.violated ? "  [VIOLATED]" : "") << "  ("
                  << record.total_evaluations << " evaluations)\n";
        any_violated = any_violated || record.violated;
    }
    std::cout << "artifacts written to " << config.output_dir << "\n";
    return (any_violated || any_failed) ? 1 : 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                double epsilon, const std::string& out_path) {
    const auto rows_a = load_quality_csv(path_a);
    const auto rows_b = load_quality_csv(path_b);
    ComparisonReport report;
    try {
        report = compare_systems(rows_a, rows_b, epsilon);
    } catch (const std::invalid_argument& e) {
        std::cerr << "compare error: " << e.what() << "\n";
        return 1;  // mismatched suites is a domain verdict failure
    }
    if (out_path.empty()) {
        write_comparison_csv(report, std::cout);
    } else {
        std::ofstream out(out_path);
        write_comparison_csv(report, out);
    }
    return report.any_regressed ? 1 : 0;
}

int cmd_gate(const std::string& records_path, const std::string& thresholds_path,
             const std::string& out_path) {
    const auto rows = load_quality_csv(records_path);
    std::ifstream in(thresholds_path);
    if (!in) throw std::runtime_error("cannot read thresholds: " + thresholds_path);
    nlohmann::json j;
    in >> j;
    std::map<std::string, double> thresholds;
    for (const auto& [key, value] : j.items()) {
        thresholds[key] = value.get<double>();
    }

    GateResult result;
    try {
        result = release_gate(rows, thresholds);
    } catch (const std::invalid_argument& e) {
        std::cerr << "gate error: " << e.what() << "\n";
        return 2;
    }
    const nlohmann::json verdict = gate_result_to_json(result);
    if (out_path.empty()) {
        std::cout << verdict.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        out << verdict.dump(2) << "\n";
    }
    for (const auto& row : result.rows) {
        std::cout << row.logical_id << ": " << (row.pass ? "pass" : "FAIL")
                  << (row.reason.empty() ? "" : " (" + row.reason + ")") << "\n";
    }
    std::cout << (result.pass ? "RELEASE GATE PASSED" : "RELEASE GATE FAILED")
              << "\n";
    return result.pass ? 0 : 1;
}

int cmd_plot(const std::string& input, const std::string& out_path) {
    std::string svg;
    if (input.size() > 6 && input.substr(input.size() - 6) == ".jsonl") {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot read log: " + input);
        std::vector<ScatterPoint> points;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const nlohmann::json entry = nlohmann::json::parse(line);
            const auto& values = entry.at("values");
            if (values.size() != 2) {
                throw std::runtime_error(
                    "scatter plot needs a 2-variable search space, log has " +
                    std::to_string(values.size()));
            }
            const bool bad = entry.value("violated", false) ||
                             (entry.at("value").is_number() &&
                              entry.at("value").get<double>() < 0.0);
            points.push_back({values[0].get<double>(), values[1].get<double>(), bad});
        }
        svg = svg_scatter(input, points, "variable 0", "variable 1");
    } else {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot read trace: " + input);
        std::string header;
        if (!std::getline(in, header)) {
            throw std::runtime_error("empty trace file: " + input);
        }
        std::vector<std::string> columns;
        {
            std::stringstream ss(header);
            std::string c;
            while (std::getline(ss, c, ',')) columns.push_back(c);
        }
        if (columns.size() < 2) {
            throw std::runtime_error("trace needs at least two columns");
        }
        std::vector<PlotSeries> series(columns.size() - 1);
        for (std::size_t i = 1; i < columns.size(); ++i) {
            series[i - 1].name = columns[i];
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string field;
            std::size_t col = 0;
            double x = 0.0;
            while (std::getline(ss, field, ',')) {
                const double value = std::stod(field);
                if (col == 0) {
                    x = value;
                } else if (col - 1 < series.size()) {
                    series[col - 1].x.push_back(x);
                    series[col - 1].y.push_back(value);
                }
                ++col;
            }
        }
        svg = svg_line_chart(input, series);
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write: " + out_path);
    out << svg;
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Search-based worst-case scenario testing for driving controllers"};
    app.require_subcommand(1);

    std::vector<std::string> validate_paths;
    auto* validate = app.add_subcommand("validate", "Validate logical scenario files");
    validate->add_option("paths", validate_paths, "scenario files")->required();

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    int jobs = 0;
    auto* run = app.add_subcommand("run", "Run a test campaign");
    run->add_option("--config", config_path, "campaign config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (overrides config and $LIMTEST_OUT)");
    run->add_option("--seed-override", seed_override, "replace the seed list with one seed");
    run->add_option("--jobs", jobs, "parallel fitness evaluations");

    std::string path_a, path_b, compare_out;
    double epsilon = 1e-3;
    auto* compare = app.add_subcommand("compare", "Compare two quality tables");
    compare->add_option("records_a", path_a, "quality.csv of system A")->required();
    compare->add_option("records_b", path_b, "quality.csv of system B")->required();
    compare->add_option("--epsilon", epsilon, "unchanged band (margin units)");
    compare->add_option("--out", compare_out, "comparison CSV output");

    std::string gate_records, gate_thresholds, gate_out;
    auto* gate = app.add_subcommand("gate", "Check worst-case qualities against release thresholds");
    gate->add_option("records", gate_records, "quality.csv")->required();
    gate->add_option("thresholds", gate_thresholds, "thresholds JSON {id: min m*}")->required();
    gate->add_option("--out", gate_out, "verdict JSON output");

    std::string plot_input, plot_out;
    auto* plot = app.add_subcommand("plot", "Render a trace CSV or evaluation log as SVG");
    plot->add_option("input", plot_input, "trace .csv or evaluation .jsonl")->required();
    plot->add_option("--out", plot_out, "SVG output path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return cmd_validate(validate_paths);
        if (*run) return cmd_run(config_path, out_dir, seed_override, jobs);
        if (*compare) return cmd_compare(path_a, path_b, epsilon, compare_out);
        if (*gate) return cmd_gate(gate_records, gate_thresholds, gate_out);
        if (*plot) return cmd_plot(plot_input, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace limtest
