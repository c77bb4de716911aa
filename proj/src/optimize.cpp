#include "limtest/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace limtest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

// Shared budget/accounting across the algorithms: history, best-so-far and
// the three termination criteria.
class RunState {
public:
    RunState(const BatchFn& f, const Budget& budget, std::uint64_t seed)
        : f_(f), budget_(budget), start_(Clock::now()) {
        if (budget.max_evaluations < 1) {
            throw std::invalid_argument("max_evaluations must be >= 1");
        }
        if (budget.eps_improve < 0) {
            throw std::invalid_argument("eps_improve must be >= 0");
        }
        result_.seed = seed;
    }

    int remaining() const { return budget_.max_evaluations - evals_; }

    // Returns true when the run must stop and sets the termination reason.
    bool stop() {
        if (remaining() <= 0) {
            result_.termination = Termination::MaxEvaluations;
            return true;
        }
        if (since_improve_ >= budget_.stagnation_window) {
            result_.termination = Termination::Stagnation;
            return true;
        }
        if (budget_.wall_clock_limit) {
            const double elapsed =
                std::chrono::duration<double>(Clock::now() - start_).count();
            if (elapsed >= *budget_.wall_clock_limit) {
                result_.termination = Termination::WallClock;
                return true;
            }
        }
        return false;
    }

    // Evaluate a batch (already capped to remaining()) and fold it into the
    // history in candidate order.
    std::vector<std::vector<double>> submit(
        const std::vector<std::vector<double>>& points) {
        auto values = f_(points);
        if (values.size() != points.size()) {
            throw std::runtime_error("objective returned wrong batch size");
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            result_.history.push_back({evals_, points[i], values[i]});
            ++evals_;
            note(points[i], values[i]);
        }
        return values;
    }

    OptimizationResult take() && { return std::move(result_); }

protected:
    virtual void note(const std::vector<double>& point,
                      const std::vector<double>& value) = 0;

    const Budget& budget_;
    OptimizationResult result_;
    int since_improve_ = 0;

private:
    const BatchFn& f_;
    Clock::time_point start_;
    int evals_ = 0;
};

class ScalarRunState : public RunState {
public:
    using RunState::RunState;

    double best() const { return best_; }

protected:
    void note(const std::vector<double>& point,
              const std::vector<double>& value) override {
        const double v = value.front();
        if (best_ - v > budget_.eps_improve) {
            since_improve_ = 0;
        } else {
            ++since_improve_;
        }
        if (v < best_) {
            best_ = v;
            result_.best_point = point;
            result_.best_value = value;
        }
    }

private:
    double best_ = kInf;
};

std::vector<double> sample_uniform(const SearchSpace& space, std::mt19937_64& rng) {
    std::vector<double> point(space.dims());
    for (std::size_t i = 0; i < space.dims(); ++i) {
        std::uniform_real_distribution<double> dist(space.bounds[i][0],
                                                    space.bounds[i][1]);
        point[i] = dist(rng);
    }
    return point;
}

std::vector<double> scalars(const std::vector<std::vector<double>>& values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].front();
    return out;
}

void mutate(std::vector<double>& point, const SearchSpace& space, double sigma_rel,
            std::mt19937_64& rng) {
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double width = space.bounds[i][1] - space.bounds[i][0];
        std::normal_distribution<double> noise(0.0, sigma_rel * width);
        point[i] += noise(rng);
    }
    point = project(space, std::move(point));
}

}  // namespace

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::MaxEvaluations: return "max_evaluations";
        case Termination::Stagnation: return "stagnation";
        case Termination::WallClock: return "wall_clock";
    }
    return "unknown";
}

OptimizationResult random_search(const BatchFn& f, const SearchSpace& space,
                                 const Budget& budget, std::uint64_t seed) {
    ScalarRunState state(f, budget, seed);
    std::mt19937_64 rng(seed);
    while (!state.stop()) {
        const int n = std::min(64, state.remaining());
        std::vector<std::vector<double>> batch;
        batch.reserve(n);
        for (int i = 0; i < n; ++i) batch.push_back(sample_uniform(space, rng));
        state.submit(batch);
    }
    return std::move(state).take();
}

OptimizationResult genetic_algorithm(const BatchFn& f, const SearchSpace& space,
                                     const Budget& budget, std::uint64_t seed,
                                     const GaParams& params) {
    if (params.pop < 2) throw std::invalid_argument("population must be >= 2");
    ScalarRunState state(f, budget, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> pop;
    std::vector<double> vals;
    {
        const int n = std::min(params.pop, state.remaining());
        for (int i = 0; i < n; ++i) pop.push_back(sample_uniform(space, rng));
        vals = scalars(state.submit(pop));
    }

    auto tournament = [&]() -> int {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(pop.size()) - 1);
        int winner = pick(rng);
        for (int i = 1; i < params.tournament_k; ++i) {
            const int rival = pick(rng);
            if (vals[rival] < vals[winner]) winner = rival;
        }
        return winner;
    };

    while (!state.stop()) {
        const int lambda = std::min(params.pop, state.remaining());
        std::vector<std::vector<double>> offspring;
        offspring.reserve(lambda);
        for (int i = 0; i < lambda; ++i) {
            const auto& p1 = pop[tournament()];
            const auto& p2 = pop[tournament()];
            std::vector<double> child = p1;
            if (unit(rng) < params.crossover_rate) {
                const double alpha = unit(rng);
                for (std::size_t k = 0; k < child.size(); ++k) {
                    child[k] = alpha * p1[k] + (1.0 - alpha) * p2[k];
                }
            }
            mutate(child, space, params.sigma_rel, rng);
            offspring.push_back(std::move(child));
        }
        const auto ovals = scalars(state.submit(offspring));

        // (mu + lambda) elitist survival
        std::vector<int> order(pop.size() + offspring.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        auto value_of = [&](int i) {
            return i < static_cast<int>(pop.size())
                       ? vals[i]
                       : ovals[i - static_cast<int>(pop.size())];
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return value_of(a) < value_of(b); });
        std::vector<std::vector<double>> next_pop;
        std::vector<double> next_vals;
        const std::size_t keep = std::min<std::size_t>(params.pop, order.size());
        for (std::size_t i = 0; i < keep; ++i) {
            const int idx = order[i];
            next_pop.push_back(idx < static_cast<int>(pop.size())
                                   ? pop[idx]
                                   : offspring[idx - pop.size()]);
            next_vals.push_back(value_of(idx));
        }
        pop = std::move(next_pop);
        vals = std::move(next_vals);
    }
    return std::move(state).take();
}

OptimizationResult particle_swarm(const BatchFn& f, const SearchSpace& space,
                                  const Budget& budget, std::uint64_t seed,
                                  const PsoParams& params) {
    if (params.swarm < 2) throw std::invalid_argument("swarm must be >= 2");
    ScalarRunState state(f, budget, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t dims = space.dims();

    const int n = std::min(params.swarm, state.remaining());
    std::vector<std::vector<double>> x, v, pbest;
    std::vector<double> pval;
    for (int i = 0; i < n; ++i) {
        x.push_back(sample_uniform(space, rng));
        v.emplace_back(dims, 0.0);
    }
    pval = scalars(state.submit(x));
    pbest = x;
    int g = static_cast<int>(std::min_element(pval.begin(), pval.end()) -
                             pval.begin());

    while (!state.stop()) {
        const int m = std::min(static_cast<int>(x.size()), state.remaining());
        std::vector<std::vector<double>> moved;
        moved.reserve(m);
        for (int i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < dims; ++k) {
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                v[i][k] = params.w * v[i][k] +
                          params.c1 * r1 * (pbest[i][k] - x[i][k]) +
                          params.c2 * r2 * (pbest[g][k] - x[i][k]);
                x[i][k] += v[i][k];
                const double lo = space.bounds[k][0];
                const double hi = space.bounds[k][1];
                if (x[i][k] < lo || x[i][k] > hi) {
                    x[i][k] = std::clamp(x[i][k], lo, hi);
                    v[i][k] = 0.0;  // velocity zeroed on clamped axes
                }
            }
            moved.push_back(x[i]);
        }
        const auto vals = scalars(state.submit(moved));
        for (int i = 0; i < m; ++i) {
            if (vals[i] < pval[i]) {
                pval[i] = vals[i];
                pbest[i] = x[i];
                if (vals[i] < pval[g]) g = i;
            }
        }
    }
    return std::move(state).take();
}

bool dominates(const std::vector<double>& p, const std::vector<double>& q) {
    bool strict = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > q[i]) return false;
        if (p[i] < q[i]) strict = true;
    }
    return strict;
}

std::vector<std::vector<int>> non_dominated_sort(
    const std::vector<std::vector<double>>& points) {
    const int n = static_cast<int>(points.size());
    for (const auto& p : points) {
        if (!points.empty() && p.size() != points.front().size()) {
            throw std::invalid_argument("objective vectors have mixed dimensions");
        }
    }
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> count(n, 0);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++count[p];
            }
        }
    }
    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int p = 0; p < n; ++p) {
        if (count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int p : current) {
            for (int q : dominated[p]) {
                if (--count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points,
                                      const std::vector<int>& front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    const std::size_t objectives = points[front[0]].size();
    for (std::size_t m = 0; m < objectives; ++m) {
        std::vector<int> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return points[front[a]][m] < points[front[b]][m];
        });
        dist[order.front()] = kInf;
        dist[order.back()] = kInf;
        const double span =
            points[front[order.back()]][m] - points[front[order.front()]][m];
        if (span <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            dist[order[i]] += (points[front[order[i + 1]]][m] -
                               points[front[order[i - 1]]][m]) /
                              span;
        }
    }
    return dist;
}

namespace {

// Improvement for the stagnation criterion in the multi-objective case: a
// value vector counts when it dominates an archive member or adds a new
// non-dominated tradeoff.
class ParetoRunState : public RunState {
public:
    using RunState::RunState;

protected:
    void note(const std::vector<double>& /*point*/,
              const std::vector<double>& value) override {
        bool is_dominated = false;
        bool duplicate = false;
        for (const auto& a : archive_) {
            if (dominates(a, value)) is_dominated = true;
            if (a == value) duplicate = true;
        }
        if (is_dominated || duplicate) {
            ++since_improve_;
            return;
        }
        since_improve_ = 0;  // new non-dominated tradeoff or dominating point
        std::vector<std::vector<double>> next;
        for (auto& a : archive_) {
            if (!dominates(value, a)) next.push_back(std::move(a));
        }
        next.push_back(value);
        archive_ = std::move(next);
    }

private:
    std::vector<std::vector<double>> archive_;
};

}  // namespace

OptimizationResult nsga2(const BatchFn& f_vec, const SearchSpace& space,
                         const Budget& budget, std::uint64_t seed,
                         const Nsga2Params& params) {
    if (params.pop < 2) throw std::invalid_argument("population must be >= 2");
    ParetoRunState state(f_vec, budget, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> pop, vals;
    {
        const int n = std::min(params.pop, state.remaining());
        for (int i = 0; i < n; ++i) pop.push_back(sample_uniform(space, rng));
        vals = state.submit(pop);
    }

    std::vector<int> rank(pop.size(), 0);
    std::vector<double> crowd(pop.size(), 0.0);
    auto rank_population = [&]() {
        const auto fronts = non_dominated_sort(vals);
        rank.assign(pop.size(), 0);
        crowd.assign(pop.size(), 0.0);
        for (std::size_t fi = 0; fi < fronts.size(); ++fi) {
            const auto dist = crowding_distance(vals, fronts[fi]);
            for (std::size_t i = 0; i < fronts[fi].size(); ++i) {
                rank[fronts[fi][i]] = static_cast<int>(fi);
                crowd[fronts[fi][i]] = dist[i];
            }
        }
    };
    rank_population();

    auto crowded_tournament = [&]() -> int {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(pop.size()) - 1);
        const int a = pick(rng);
        const int b = pick(rng);
        if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
        return crowd[a] >= crowd[b] ? a : b;
    };

    while (!state.stop()) {
        const int lambda = std::min(params.pop, state.remaining());
        std::vector<std::vector<double>> offspring;
        offspring.reserve(lambda);
        for (int i = 0; i < lambda; ++i) {
            const auto& p1 = pop[crowded_tournament()];
            const auto& p2 = pop[crowded_tournament()];
            std::vector<double> child = p1;
            if (unit(rng) < params.crossover_rate) {
                const double alpha = unit(rng);
                for (std::size_t k = 0; k < child.size(); ++k) {
                    child[k] = alpha * p1[k] + (1.0 - alpha) * p2[k];
                }
            }
            mutate(child, space, params.sigma_rel, rng);
            offspring.push_back(std::move(child));
        }
        const auto ovals = state.submit(offspring);

        std::vector<std::vector<double>> all_pop = pop;
        std::vector<std::vector<double>> all_vals = vals;
        all_pop.insert(all_pop.end(), offspring.begin(), offspring.end());
        all_vals.insert(all_vals.end(), ovals.begin(), ovals.end());

        const auto fronts = non_dominated_sort(all_vals);
        std::vector<std::vector<double>> next_pop, next_vals;
        for (const auto& front : fronts) {
            if (next_pop.size() + front.size() <=
                static_cast<std::size_t>(params.pop)) {
                for (int idx : front) {
                    next_pop.push_back(all_pop[idx]);
                    next_vals.push_back(all_vals[idx]);
                }
            } else {
                const auto dist = crowding_distance(all_vals, front);
                std::vector<int> order(front.size());
                for (std::size_t i = 0; i < front.size(); ++i) {
                    order[i] = static_cast<int>(i);
                }
                std::stable_sort(order.begin(), order.end(),
                                 [&](int a, int b) { return dist[a] > dist[b]; });
                for (int oi : order) {
                    if (next_pop.size() >= static_cast<std::size_t>(params.pop)) {
                        break;
                    }
                    next_pop.push_back(all_pop[front[oi]]);
                    next_vals.push_back(all_vals[front[oi]]);
                }
            }
            if (next_pop.size() >= static_cast<std::size_t>(params.pop)) break;
        }
        pop = std::move(next_pop);
        vals = std::move(next_vals);
        rank.resize(pop.size());
        crowd.resize(pop.size());
        rank_population();
    }

    OptimizationResult result = std::move(state).take();
    const auto fronts = non_dominated_sort(vals);
    if (!fronts.empty()) {
        for (int idx : fronts.front()) {
            result.pareto_points.push_back(pop[idx]);
            result.pareto_values.push_back(vals[idx]);
        }
    }
    if (!result.pareto_values.empty()) {
        result.best_point = result.pareto_points.front();
        result.best_value = result.pareto_values.front();
    }
    return result;
}

}  // namespace limtest
