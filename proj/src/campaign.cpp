#include "limtest/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "limtest/format.hpp"
#include "limtest/plot.hpp"

namespace limtest {

namespace fs = std::filesystem;

std::unique_ptr<Sut> make_sut(const SutConfig& config) {
    if (config.type == "acc_reference") {
        return std::make_unique<AccSut>(config.acc, /*flawed=*/false);
    }
    if (config.type == "acc_flawed") {
        return std::make_unique<AccSut>(config.acc, /*flawed=*/true);
    }
    if (config.type == "lane_change") {
        return std::make_unique<LaneChangeSut>(config.acc, config.lane_change);
    }
    throw std::invalid_argument("unknown sut type: " + config.type);
}

namespace {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

SutConfig sut_from_json(const nlohmann::json& j) {
    SutConfig c;
    get_if_present(j, "type", c.type);
    if (j.contains("params")) {
        const auto& p = j.at("params");
        get_if_present(p, "tau", c.acc.tau);
        get_if_present(p, "d0", c.acc.d0);
        get_if_present(p, "v_set", c.acc.v_set);
        get_if_present(p, "kp", c.acc.kp);
        get_if_present(p, "kv", c.acc.kv);
        get_if_present(p, "ttc_aeb", c.acc.ttc_aeb);
        get_if_present(p, "sensor_range", c.acc.sensor_range);
        get_if_present(p, "a_min", c.acc.a_min);
        get_if_present(p, "a_max", c.acc.a_max);
        get_if_present(p, "target_lane", c.lane_change.target_lane);
        get_if_present(p, "g_front_min", c.lane_change.g_front_min);
        get_if_present(p, "g_rear_min", c.lane_change.g_rear_min);
    }
    return c;
}

SimConfig sim_from_json(const nlohmann::json& j) {
    SimConfig c;
    get_if_present(j, "dt", c.dt);
    get_if_present(j, "horizon", c.horizon);
    get_if_present(j, "lanes", c.lanes);
    get_if_present(j, "lane_width", c.lane_width);
    get_if_present(j, "a_min", c.a_min);
    get_if_present(j, "a_max", c.a_max);
    get_if_present(j, "lat_speed", c.lat_speed);
    get_if_present(j, "vehicle_length", c.vehicle_length);
    get_if_present(j, "vehicle_width", c.vehicle_width);
    get_if_present(j, "sensor_range", c.sensor_range);
    if (c.dt <= 0 || c.horizon < c.dt || c.lanes < 1) {
        throw std::invalid_argument("sim config: need dt > 0, horizon >= dt, lanes >= 1");
    }
    return c;
}

EnvelopeSpec envelope_from_json(const nlohmann::json& j, const SimConfig& sim) {
    EnvelopeSpec e;
    // road bounds and lateral clearance follow the road unless overridden
    e.lat_min = -sim.lane_width / 2.0;
    e.lat_max = (sim.lanes - 0.5) * sim.lane_width;
    e.lat_required = sim.vehicle_width / 2.0;
    get_if_present(j, "tau", e.tau);
    get_if_present(j, "d0", e.d0);
    get_if_present(j, "rear_tau", e.rear_tau);
    get_if_present(j, "rear_d0", e.rear_d0);
    get_if_present(j, "ttc_min", e.ttc_min);
    get_if_present(j, "ttc_cap", e.ttc_cap);
    get_if_present(j, "lat_min", e.lat_min);
    get_if_present(j, "lat_max", e.lat_max);
    get_if_present(j, "lat_required", e.lat_required);
    if (e.tau <= 0 || e.d0 <= 0 || e.rear_tau <= 0 || e.rear_d0 <= 0 ||
        e.ttc_min <= 0) {
        throw std::invalid_argument("envelope parameters must be positive");
    }
    return e;
}

ObjectiveSpec objective_from_json(const nlohmann::json& j) {
    ObjectiveSpec o;
    std::string mode = "worst_case";
    get_if_present(j, "mode", mode);
    if (mode == "worst_case") {
        o.mode = ObjectiveMode::WorstCase;
    } else if (mode == "utilization") {
        o.mode = ObjectiveMode::Utilization;
    } else if (mode == "multi") {
        o.mode = ObjectiveMode::Multi;
    } else {
        throw std::invalid_argument("unknown objective mode: " + mode);
    }
    get_if_present(j, "penalty", o.penalty);
    get_if_present(j, "overlap_normalizer", o.overlap_normalizer);
    get_if_present(j, "gap_variable", o.gap_variable);
    if (o.penalty <= 2.0) {
        throw std::invalid_argument("objective penalty must be > 2");
    }
    return o;
}

OptimizerConfig optimizer_from_json(const nlohmann::json& j) {
    OptimizerConfig c;
    get_if_present(j, "algorithm", c.algorithm);
    if (c.algorithm != "random" && c.algorithm != "ga" && c.algorithm != "pso" &&
        c.algorithm != "nsga2") {
        throw std::invalid_argument("unknown optimizer algorithm: " + c.algorithm);
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        get_if_present(p, "pop", c.ga.pop);
        get_if_present(p, "tournament_k", c.ga.tournament_k);
        get_if_present(p, "crossover_rate", c.ga.crossover_rate);
        get_if_present(p, "sigma_rel", c.ga.sigma_rel);
        get_if_present(p, "swarm", c.pso.swarm);
        get_if_present(p, "w", c.pso.w);
        get_if_present(p, "c1", c.pso.c1);
        get_if_present(p, "c2", c.pso.c2);
        c.nsga2.pop = c.ga.pop;
        c.nsga2.crossover_rate = c.ga.crossover_rate;
        c.nsga2.sigma_rel = c.ga.sigma_rel;
    }
    return c;
}

Budget budget_from_json(const nlohmann::json& j) {
    Budget b;
    get_if_present(j, "max_evaluations", b.max_evaluations);
    get_if_present(j, "stagnation_window", b.stagnation_window);
    get_if_present(j, "eps_improve", b.eps_improve);
    if (j.contains("wall_clock_limit")) {
        b.wall_clock_limit = j.at("wall_clock_limit").get<double>();
    }
    if (b.max_evaluations < 1) {
        throw std::invalid_argument("budget max_evaluations must be >= 1");
    }
    return b;
}

}  // namespace

CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
    CampaignConfig c;
    c.suite = j.at("suite").get<std::vector<std::string>>();
    if (c.suite.empty()) throw std::invalid_argument("suite must not be empty");
    if (j.contains("sut")) c.sut = sut_from_json(j.at("sut"));
    if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
    c.envelope = envelope_from_json(j.value("envelope", nlohmann::json::object()),
                                    c.sim);
    if (j.contains("objective")) c.objective = objective_from_json(j.at("objective"));
    if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"));
    if (j.contains("budget")) c.budget = budget_from_json(j.at("budget"));
    if (j.contains("seeds")) {
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (c.seeds.empty()) throw std::invalid_argument("need at least one seed");
    get_if_present(j, "output_dir", c.output_dir);
    get_if_present(j, "jobs", c.jobs);
    if (c.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    return c;
}

CampaignConfig load_campaign_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
        return campaign_config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("cannot parse config file " + path + ": " +
                                 e.what());
    }
}

namespace {

// Evaluates one generation's candidates, possibly on several threads, and
// appends results to the JSONL log in candidate order afterwards. Results are
// therefore independent of the worker count.
class CampaignEvaluator {
public:
    CampaignEvaluator(const LogicalScenario& logical, const Sut& sut,
                      const SimConfig& sim, const EnvelopeSpec& envelope,
                      const ObjectiveSpec& objective, int jobs,
                      std::uint64_t seed, std::ostream* log)
        : logical_(logical), sut_(sut), sim_(sim), envelope_(envelope),
          objective_(objective), jobs_(jobs), seed_(seed), log_(log) {}

    std::vector<std::vector<double>> operator()(
        const std::vector<std::vector<double>>& points) {
        std::vector<QualityValue> qualities(points.size());
        auto worker_body = [&](std::atomic<std::size_t>& next) {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= points.size()) return;
                const ConcreteScenario concrete =
                    instantiate(logical_, points[i]);
                qualities[i] = evaluate(concrete, logical_, sut_, sim_,
                                        envelope_, objective_);
            }
        };

        std::atomic<std::size_t> next{0};
        const int workers =
            std::min<int>(jobs_, static_cast<int>(points.size()));
        if (workers <= 1) {
            worker_body(next);
        } else {
            std::vector<std::thread> threads;
            std::exception_ptr failure;
            std::mutex failure_mutex;
            for (int w = 0; w < workers; ++w) {
                threads.emplace_back([&] {
                    try {
                        worker_body(next);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next.store(points.size());
                    }
                });
            }
            for (auto& t : threads) t.join();
            if (failure) std::rethrow_exception(failure);
        }

        std::vector<std::vector<double>> values(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            values[i] = qualities[i].values;
            if (log_ != nullptr) {
                nlohmann::json line;
                line["eval_index"] = eval_index_++;
                line["values"] = points[i];
                line["value"] = qualities[i].values.size() == 1
                                    ? nlohmann::json(qualities[i].values.front())
                                    : nlohmann::json(qualities[i].values);
                line["components"] = qualities[i].components;
                line["violated"] = qualities[i].violated;
                line["seed"] = seed_;
                *log_ << line.dump() << "\n";
            }
        }
        return values;
    }

private:
    const LogicalScenario& logical_;
    const Sut& sut_;
    const SimConfig& sim_;
    const EnvelopeSpec& envelope_;
    const ObjectiveSpec& objective_;
    int jobs_;
    std::uint64_t seed_;
    std::ostream* log_;
    int eval_index_ = 0;
};

OptimizationResult run_optimizer(const OptimizerConfig& config, const BatchFn& f,
                                 const SearchSpace& space, const Budget& budget,
                                 std::uint64_t seed) {
    if (config.algorithm == "random") return random_search(f, space, budget, seed);
    if (config.algorithm == "ga") {
        return genetic_algorithm(f, space, budget, seed, config.ga);
    }
    if (config.algorithm == "pso") {
        return particle_swarm(f, space, budget, seed, config.pso);
    }
    return nsga2(f, space, budget, seed, config.nsga2);
}

void export_worst_case(const CampaignConfig& config,
                       const LogicalScenario& logical,
                       const WorstCaseRecord& record,
                       const OptimizationResult& best_run,
                       const fs::path& dir) {
    const ConcreteScenario concrete{logical.id, record.best_values};
    World world = build_world(concrete, logical, config.sim);
    const WorldValidity validity = assess_world(world, config.envelope);
    if (shaping_penalty(validity, config.objective) > 0.0) {
        return;  // the best point never produced a clean trace
    }
    auto sut = make_sut(config.sut);
    const Trace trace = run_closed_loop(concrete, logical, *sut, config.sim);
    const MarginReport report = trace_margin(trace, config.envelope);

    std::ofstream csv(dir / "worst_trace.csv");
    write_trace_csv(trace, csv, &report.margin);

    std::vector<PlotSeries> series;
    for (std::size_t k = 0; k < trace.agent_ids.size(); ++k) {
        PlotSeries gap_series;
        gap_series.name = trace.agent_ids[k] + " gap [m]";
        gap_series.x = trace.times;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            gap_series.y.push_back(bumper_gap(
                trace.agents[k][i].s - trace.ego[i].s, config.sim.vehicle_length));
        }
        series.push_back(std::move(gap_series));
    }
    series.push_back({"margin", trace.times, report.margin});
    std::ofstream svg(dir / "worst_trace.svg");
    svg << svg_line_chart(logical.id + " worst case", series);

    if (logical.variables.size() == 2) {
        std::vector<ScatterPoint> points;
        for (const auto& entry : best_run.history) {
            points.push_back({entry.point[0], entry.point[1],
                              entry.value.front() < 0.0});
        }
        std::ofstream scatter(dir / "search_scatter.svg");
        scatter << svg_scatter(logical.id + " evaluations", points,
                               logical.variables[0].name,
                               logical.variables[1].name);
    }
}

nlohmann::json record_to_json(const WorstCaseRecord& record) {
    nlohmann::json j;
    j["logical_id"] = record.logical_id;
    j["ok"] = record.ok;
    if (!record.ok) {
        j["error"] = record.error;
        return j;
    }
    j["m_star"] = record.m_star;
    j["violated"] = record.violated;
    j["best_values"] = record.best_values;
    j["seed_of_best"] = record.seed_of_best;
    j["total_evaluations"] = record.total_evaluations;
    j["per_seed"] = nlohmann::json::array();
    for (const auto& s : record.per_seed) {
        j["per_seed"].push_back({{"seed", s.seed},
                                 {"best", s.best},
                                 {"best_point", s.best_point},
                                 {"evaluations", s.evaluations},
                                 {"termination", termination_name(s.termination)}});
    }
    return j;
}

}  // namespace

std::vector<WorstCaseRecord> run_campaign(const CampaignConfig& config) {
    fs::create_directories(config.output_dir);
    auto sut = make_sut(config.sut);

    std::vector<WorstCaseRecord> records;
    for (const auto& path : config.suite) {
        WorstCaseRecord record;
        try {
            const LogicalScenario logical = load_scenario(path);
            record.logical_id = logical.id;
            const SearchSpace space = search_space(logical);

            const fs::path dir = fs::path(config.output_dir) / logical.id;
            fs::create_directories(dir);

            std::optional<OptimizationResult> best_run;
            for (const std::uint64_t seed : config.seeds) {
                std::ofstream log(dir / ("seed" + std::to_string(seed) + ".jsonl"));
                CampaignEvaluator evaluator(logical, *sut, config.sim,
                                            config.envelope, config.objective,
                                            config.jobs, seed, &log);
                OptimizationResult result = run_optimizer(
                    config.optimizer, std::ref(evaluator), space, config.budget,
                    seed);

                SeedOutcome outcome;
                outcome.seed = seed;
                outcome.best = result.best_value.front();
                outcome.best_point = result.best_point;
                outcome.evaluations = static_cast<int>(result.history.size());
                outcome.termination = result.termination;
                record.total_evaluations += outcome.evaluations;

                if (record.per_seed.empty() || outcome.best < record.m_star) {
                    record.m_star = outcome.best;
                    record.best_values = outcome.best_point;
                    record.seed_of_best = seed;
                    best_run = std::move(result);
                }
                record.per_seed.push_back(std::move(outcome));
            }

            // the reported flags come from one deterministic re-evaluation
            const ConcreteScenario best{logical.id, record.best_values};
            const QualityValue q = evaluate(best, logical, *sut, config.sim,
                                            config.envelope, config.objective);
            record.violated = q.violated;
            record.ok = true;
            export_worst_case(config, logical, record, *best_run, dir);
        } catch (const std::exception& e) {
            if (record.logical_id.empty()) record.logical_id = path;
            record.ok = false;
            record.error = e.what();
        }
        records.push_back(std::move(record));
    }

    std::vector<QualityRow> rows;
    for (const auto& record : records) rows.push_back(to_quality_row(record));
    std::ofstream csv(fs::path(config.output_dir) / "quality.csv");
    write_quality_csv(rows, csv);

    nlohmann::json all = nlohmann::json::array();
    for (const auto& record : records) all.push_back(record_to_json(record));
    std::ofstream json_out(fs::path(config.output_dir) / "records.json");
    json_out << all.dump(2) << "\n";

    return records;
}

QualityRow to_quality_row(const WorstCaseRecord& record) {
    QualityRow row;
    row.logical_id = record.logical_id;
    row.ok = record.ok;
    if (record.ok) {
        row.m_star = record.m_star;
        row.violated = record.violated;
        row.evaluations = record.total_evaluations;
        row.seed_of_best = record.seed_of_best;
        row.values = record.best_values;
    }
    return row;
}

void write_quality_csv(const std::vector<QualityRow>& rows, std::ostream& out) {
    out << "logical_id,status,m_star,violated,evals,seed_of_best,values\n";
    for (const auto& row : rows) {
        out << row.logical_id << "," << (row.ok ? "ok" : "error") << ",";
        if (row.ok) {
            out << fmt_double(row.m_star) << "," << (row.violated ? 1 : 0) << ","
                << row.evaluations << "," << row.seed_of_best << ",";
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                if (i != 0) out << ";";
                out << fmt_double(row.values[i]);
            }
        } else {
            out << ",,,,";
        }
        out << "\n";
    }
}

std::vector<QualityRow> read_quality_csv(std::istream& in) {
    std::vector<QualityRow> rows;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty quality table");
    }
    if (line.rfind("logical_id,status,", 0) != 0) {
        throw std::runtime_error("not a quality table (unexpected header)");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        fields.resize(7);
        QualityRow row;
        row.logical_id = fields[0];
        row.ok = fields[1] == "ok";
        if (row.ok) {
            row.m_star = std::stod(fields[2]);
            row.violated = fields[3] == "1";
            row.evaluations = std::stoi(fields[4]);
            row.seed_of_best = std::stoull(fields[5]);
            std::stringstream vs(fields[6]);
            std::string v;
            while (std::getline(vs, v, ';')) {
                if (!v.empty()) row.values.push_back(std::stod(v));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<QualityRow> load_quality_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read quality table: " + path);
    return read_quality_csv(in);
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Improved: return "improved";
        case Verdict::Regressed: return "regressed";
        case Verdict::Unchanged: return "unchanged";
        case Verdict::Failed: return "failed";
    }
    return "unknown";
}

ComparisonReport compare_systems(const std::vector<QualityRow>& records_a,
                                 const std::vector<QualityRow>& records_b,
                                 double epsilon) {
    if (records_a.size() != records_b.size()) {
        throw std::invalid_argument("mismatched suites: record counts differ");
    }
    ComparisonReport report;
    for (std::size_t i = 0; i < records_a.size(); ++i) {
        const auto& a = records_a[i];
        const auto& b = records_b[i];
        if (a.logical_id != b.logical_id) {
            throw std::invalid_argument("mismatched suites: '" + a.logical_id +
                                        "' vs '" + b.logical_id + "'");
        }
        ComparisonRow row;
        row.logical_id = a.logical_id;
        if (!a.ok || !b.ok) {
            row.verdict = Verdict::Failed;
        } else {
            row.q_a = a.m_star;
            row.q_b = b.m_star;
            row.delta = b.m_star - a.m_star;
            if (std::abs(row.delta) <= epsilon) {
                row.verdict = Verdict::Unchanged;
            } else if (row.delta < 0) {
                row.verdict = Verdict::Regressed;  // lower quality = worse behavior
                report.any_regressed = true;
            } else {
                row.verdict = Verdict::Improved;
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_comparison_csv(const ComparisonReport& report, std::ostream& out) {
    out << "logical_id,q_a,q_b,delta,verdict\n";
    for (const auto& row : report.rows) {
        out << row.logical_id << "," << fmt_double(row.q_a) << ","
            << fmt_double(row.q_b) << "," << fmt_double(row.delta) << ","
            << verdict_name(row.verdict) << "\n";
    }
}

GateResult release_gate(const std::vector<QualityRow>& records,
                        const std::map<std::string, double>& thresholds) {
    GateResult result;
    result.pass = true;
    for (const auto& record : records) {
        const auto it = thresholds.find(record.logical_id);
        if (it == thresholds.end()) {
            throw std::invalid_argument("missing threshold for scenario '" +
                                        record.logical_id + "'");
        }
        GateRow row;
        row.logical_id = record.logical_id;
        row.threshold = it->second;
        if (!record.ok) {
            row.pass = false;
            row.reason = "campaign record failed";
        } else {
            row.m_star = record.m_star;
            if (record.violated) {
                row.pass = false;
                row.reason = "envelope violated";
            } else if (record.m_star < it->second) {
                row.pass = false;
                row.reason = "insufficient reserve";
            } else {
                row.pass = true;
            }
        }
        result.pass = result.pass && row.pass;
        result.rows.push_back(std::move(row));
    }
    return result;
}

nlohmann::json gate_result_to_json(const GateResult& result) {
    nlohmann::json j;
    j["pass"] = result.pass;
    j["scenarios"] = nlohmann::json::array();
    for (const auto& row : result.rows) {
        j["scenarios"].push_back({{"logical_id", row.logical_id},
                                  {"m_star", row.m_star},
                                  {"threshold", row.threshold},
                                  {"pass", row.pass},
                                  {"reason", row.reason}});
    }
    return j;
}

}  // namespace limtest
