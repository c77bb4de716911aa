#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "limtest/envelope.hpp"
#include "limtest/fitness.hpp"
#include "limtest/optimize.hpp"
#include "limtest/scenario.hpp"
#include "limtest/simulation.hpp"
#include "limtest/sut.hpp"

namespace limtest {

struct SutConfig {
    std::string type = "acc_reference";  // acc_reference | acc_flawed | lane_change
    AccParams acc;
    LaneChangeParams lane_change;
};

std::unique_ptr<Sut> make_sut(const SutConfig& config);

struct OptimizerConfig {
    std::string algorithm = "ga";  // random | ga | pso | nsga2
    GaParams ga;
    PsoParams pso;
    Nsga2Params nsga2;
};

struct CampaignConfig {
    std::vector<std::string> suite;  // logical-scenario file paths
    SutConfig sut;
    EnvelopeSpec envelope;
    SimConfig sim;
    ObjectiveSpec objective;
    OptimizerConfig optimizer;
    Budget budget;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string output_dir = "out";
    int jobs = 1;
};

CampaignConfig campaign_config_from_json(const nlohmann::json& j);
CampaignConfig load_campaign_config(const std::string& path);

struct SeedOutcome {
    std::uint64_t seed = 0;
    double best = 0.0;
    std::vector<double> best_point;
    int evaluations = 0;
    Termination termination = Termination::MaxEvaluations;
};

struct WorstCaseRecord {
    std::string logical_id;
    bool ok = false;
    std::string error;  // set when the scenario could not be processed
    std::vector<SeedOutcome> per_seed;
    double m_star = 0.0;  // overall best quality (min over seeds)
    std::vector<double> best_values;
    std::uint64_t seed_of_best = 0;
    bool violated = false;
    int total_evaluations = 0;
};

// Runs the configured optimizer against every logical scenario in the suite
// and writes all artifacts (JSONL logs, worst-case trace CSV + SVG, quality
// table) under config.output_dir. A scenario that fails to parse or bind
// yields a failed record; the campaign continues.
std::vector<WorstCaseRecord> run_campaign(const CampaignConfig& config);

// Quality-table rows as persisted in quality.csv. Fixed column order:
// logical_id,status,m_star,violated,evals,seed_of_best,values
// where values holds the worst-case variable values joined by ';'.
struct QualityRow {
    std::string logical_id;
    bool ok = false;
    double m_star = 0.0;
    bool violated = false;
    int evaluations = 0;
    std::uint64_t seed_of_best = 0;
    std::vector<double> values;
};

QualityRow to_quality_row(const WorstCaseRecord& record);
void write_quality_csv(const std::vector<QualityRow>& rows, std::ostream& out);
std::vector<QualityRow> read_quality_csv(std::istream& in);
std::vector<QualityRow> load_quality_csv(const std::string& path);

enum class Verdict { Improved, Regressed, Unchanged, Failed };

const char* verdict_name(Verdict v);

struct ComparisonRow {
    std::string logical_id;
    double q_a = 0.0;
    double q_b = 0.0;
    double delta = 0.0;  // q_b - q_a
    Verdict verdict = Verdict::Unchanged;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool any_regressed = false;
};

// Throws std::invalid_argument when the suites do not match.
ComparisonReport compare_systems(const std::vector<QualityRow>& records_a,
                                 const std::vector<QualityRow>& records_b,
                                 double epsilon);

void write_comparison_csv(const ComparisonReport& report, std::ostream& out);

struct GateRow {
    std::string logical_id;
    double m_star = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string reason;
};

struct GateResult {
    bool pass = false;
    std::vector<GateRow> rows;
};

// Throws std::invalid_argument when a record has no threshold.
GateResult release_gate(const std::vector<QualityRow>& records,
                        const std::map<std::string, double>& thresholds);

nlohmann::json gate_result_to_json(const GateResult& result);

}  // namespace limtest
