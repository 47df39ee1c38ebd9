#pragma once

#include <r2rl/agent.hpp>
#include <r2rl/core.hpp>
#include <r2rl/operators.hpp>
#include <r2rl/problems.hpp>

#include <array>
#include <iosfwd>

namespace r2rl {

inline constexpr double kCountEpsilon = 1e-6;
inline constexpr double kSpreadGuard = 1e-12;

/// Per-episode bookkeeping behind the state features.
struct EpisodeStats {
    double f_min = 0.0;
    double f_max = 0.0;
    Vector x_min;
    Vector x_max;
    std::array<int, kOperatorCount> counts{};
    std::array<int, kOperatorCount> successes{};
    double q_mean_prev = 0.0;
    bool initialized = false;

    /// Folds the population's best and worst performance into the running extremes.
    void observe(const Population& ranked);
};

struct Quartiles {
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double mean = 0.0;  // (q1 + q2 + q3) / 3
};

/// Quartiles of member performance, linear interpolation at 0.25/0.5/0.75 * (N - 1).
Quartiles performance_quartiles(const Population& pop);

/// Index of the member whose performance is nearest `value` (ties to the lower index).
std::size_t nearest_performance_index(const Population& pop, double value);

/// The 20 observation features. Degenerate spreads map s1..s5 (or s7..s10) to 0.
StateVector encode_state(const Population& ranked, const EpisodeStats& stats, int g_t, int g_max);

/// Reward scale V(g_t) = ((g_max - g_t) / g_max)^p (c_initial - c_final) + c_final.
double reward_scale(int g_t, int g_max, const RunConfig& cfg);

/// Improvement predicate: the quartile mean decreased (reward_direction = 1) or increased (-1).
bool quartile_improved(double q_mean_t, double q_mean_prev, int reward_direction);

double compute_reward(double q_mean_t, double q_mean_prev, int g_t, int g_max, const RunConfig& cfg);

void update_success(EpisodeStats& stats, OperatorId op, double q_mean_t, double q_mean_prev, int reward_direction);

enum class PolicyMode { train, eval, fixed_op, random_op };

struct Policy {
    PolicyMode mode = PolicyMode::random_op;
    OperatorId fixed = OperatorId::GA;

    static Policy train() { return {PolicyMode::train, OperatorId::GA}; }
    static Policy greedy() { return {PolicyMode::eval, OperatorId::GA}; }
    static Policy fixed_operator(OperatorId op) { return {PolicyMode::fixed_op, op}; }
    static Policy random() { return {PolicyMode::random_op, OperatorId::GA}; }
};

struct GenerationRecord {
    int generation = 0;
    OperatorId op = OperatorId::EO;
    double reward = 0.0;
    double quartile_mean = 0.0;
    StateVector state;
};

struct EpisodeLog {
    std::vector<GenerationRecord> records;
    Population final_population;
    double total_reward = 0.0;
};

/// Inputs of one episode. `agent` is required for train and eval modes; only
/// train mode mutates it. `epsilon` is used in train mode only.
struct EpisodeSpec {
    const Problem& problem;
    const RunConfig& cfg;
    const OperatorParams& params;
    Policy policy;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
};

/// Runs g_max generations: observe, choose an operator, step, reward, learn (train mode).
EpisodeLog run_episode(const EpisodeSpec& spec, DdqnAgent* agent);

/// Greedy episode on a frozen network.
EpisodeLog run_episode(const EpisodeSpec& spec, const QNetwork& network);

void write_episode_csv(std::ostream& out, const EpisodeLog& log);

}  // namespace r2rl
