#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "limtest/scenario.hpp"

namespace limtest {

// Batch objective: candidate points in, one objective vector per point out
// (size 1 for the scalar algorithms). Candidates are generated sequentially
// from the seeded RNG and may be evaluated concurrently behind this
// interface; results must come back in candidate order.
using BatchFn = std::function<std::vector<std::vector<double>>(
    const std::vector<std::vector<double>>&)>;

struct Budget {
    int max_evaluations = 2000;
    int stagnation_window = 500;  // evaluations without improvement > eps_improve
    double eps_improve = 1e-6;
    std::optional<double> wall_clock_limit;  // seconds
};

enum class Termination { MaxEvaluations, Stagnation, WallClock };

const char* termination_name(Termination t);

struct EvalRecord {
    int index = 0;
    std::vector<double> point;
    std::vector<double> value;
};

struct OptimizationResult {
    std::vector<double> best_point;
    std::vector<double> best_value;
    std::vector<std::vector<double>> pareto_points;  // nsga2 only
    std::vector<std::vector<double>> pareto_values;
    std::vector<EvalRecord> history;
    Termination termination = Termination::MaxEvaluations;
    std::uint64_t seed = 0;
};

struct GaParams {
    int pop = 20;
    int tournament_k = 2;
    double crossover_rate = 0.9;
    double sigma_rel = 0.1;  // mutation sigma relative to interval width
};

struct PsoParams {
    int swarm = 20;
    double w = 0.7298;  // constriction defaults
    double c1 = 1.49618;
    double c2 = 1.49618;
};

struct Nsga2Params {
    int pop = 20;
    double crossover_rate = 0.9;
    double sigma_rel = 0.1;
};

OptimizationResult random_search(const BatchFn& f, const SearchSpace& space,
                                 const Budget& budget, std::uint64_t seed);

OptimizationResult genetic_algorithm(const BatchFn& f, const SearchSpace& space,
                                     const Budget& budget, std::uint64_t seed,
                                     const GaParams& params = {});

OptimizationResult particle_swarm(const BatchFn& f, const SearchSpace& space,
                                  const Budget& budget, std::uint64_t seed,
                                  const PsoParams& params = {});

OptimizationResult nsga2(const BatchFn& f_vec, const SearchSpace& space,
                         const Budget& budget, std::uint64_t seed,
                         const Nsga2Params& params = {});

// p dominates q iff p <= q in every objective and p < q in at least one.
bool dominates(const std::vector<double>& p, const std::vector<double>& q);

// Fronts of indices into `points`; front 0 is the non-dominated set. Throws
// std::invalid_argument on mixed dimensions.
std::vector<std::vector<int>> non_dominated_sort(
    const std::vector<std::vector<double>>& points);

// Crowding distance of each front member; extreme points get +inf.
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points,
                                      const std::vector<int>& front);

}  // namespace limtest
