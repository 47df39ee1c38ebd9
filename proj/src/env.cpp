#include <r2rl/env.hpp>
#include <r2rl/r2rank.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace r2rl {

void EpisodeStats::observe(const Population& ranked) {
    for (const Individual& ind : ranked.members) {
        if (!initialized || ind.performance < f_min) {
            f_min = ind.performance;
            x_min = ind.x;
        }
        if (!initialized || ind.performance > f_max) {
            f_max = ind.performance;
            x_max = ind.x;
        }
        initialized = true;
    }
}

Quartiles performance_quartiles(const Population& pop) {
    if (pop.members.empty()) throw InvalidArgument("performance_quartiles: empty population");
    Vector perf;
    perf.reserve(pop.size());
    for (const Individual& ind : pop.members) perf.push_back(ind.performance);
    std::sort(perf.begin(), perf.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(perf.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, perf.size() - 1);
        return perf[lo] + (pos - static_cast<double>(lo)) * (perf[hi] - perf[lo]);
    };
    Quartiles q{at(0.25), at(0.5), at(0.75), 0.0};
    q.mean = (q.q1 + q.q2 + q.q3) / 3.0;
    return q;
}

std::size_t nearest_performance_index(const Population& pop, double value) {
    std::size_t best = 0;
    double best_gap = std::fabs(pop.members.front().performance - value);
    for (std::size_t i = 1; i < pop.size(); ++i) {
        const double gap = std::fabs(pop.members[i].performance - value);
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return best;
}

StateVector encode_state(const Population& ranked, const EpisodeStats& stats, int g_t, int g_max) {
    if (ranked.members.empty()) throw InvalidArgument("encode_state: empty population");
    if (!stats.initialized) throw InvalidArgument("encode_state: statistics not initialized");
    StateVector s(RunConfig::n_states, 0.0);
    const Quartiles q = performance_quartiles(ranked);

    const double spread = stats.f_max - stats.f_min;
    if (spread >= kSpreadGuard) {
        s[0] = (q.q1 - stats.f_min) / spread;
        s[1] = (q.q2 - stats.f_min) / spread;
        s[2] = (q.q3 - stats.f_min) / spread;
        s[3] = (q.mean - stats.f_min) / spread;

        // Population SD against the SD of a half-f_min, half-f_max population of the same size.
        const double n = static_cast<double>(ranked.size());
        double mean = 0.0;
        for (const Individual& ind : ranked.members) mean += ind.performance;
        mean /= n;
        double var = 0.0;
        for (const Individual& ind : ranked.members) var += (ind.performance - mean) * (ind.performance - mean);
        var /= n;
        const double low_share = std::floor(n / 2.0) / n;
        const double extreme_sd = spread * std::sqrt(low_share * (1.0 - low_share));
        s[4] = extreme_sd > 0.0 ? std::sqrt(var) / extreme_sd : 0.0;
        // Members lie inside [f_min, f_max]; clamping only absorbs rounding.
        for (std::size_t k = 0; k < 5; ++k) s[k] = std::clamp(s[k], 0.0, 1.0);
    }
    s[5] = static_cast<double>(g_max - g_t) / g_max;

    const double x_range = euclidean_distance(stats.x_max, stats.x_min);
    if (x_range >= kSpreadGuard) {
        const std::array<double, 4> levels{q.q1, q.q2, q.q3, q.mean};
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const Individual& ind = ranked.members[nearest_performance_index(ranked, levels[k])];
            s[6 + k] = euclidean_distance(ind.x, stats.x_min) / x_range;
        }
    }

    for (std::size_t k = 0; k < kOperatorCount; ++k) {
        s[10 + k] = static_cast<double>(stats.counts[k]) / g_max;
        s[15 + k] = stats.successes[k] / (stats.counts[k] + kCountEpsilon);
    }

    for (double v : s)
        if (!std::isfinite(v)) throw NumericalError("encode_state produced a non-finite feature");
    return s;
}

double reward_scale(int g_t, int g_max, const RunConfig& cfg) {
    const double remaining = static_cast<double>(g_max - g_t) / g_max;
    return std::pow(remaining, cfg.power_p) * (cfg.reward_c_initial - cfg.reward_c_final) + cfg.reward_c_final;
}

bool quartile_improved(double q_mean_t, double q_mean_prev, int reward_direction) {
    return reward_direction >= 0 ? q_mean_t < q_mean_prev : q_mean_t > q_mean_prev;
}

double compute_reward(double q_mean_t, double q_mean_prev, int g_t, int g_max, const RunConfig& cfg) {
    return quartile_improved(q_mean_t, q_mean_prev, cfg.reward_direction) ? reward_scale(g_t, g_max, cfg) : 0.0;
}

void update_success(EpisodeStats& stats, OperatorId op, double q_mean_t, double q_mean_prev, int reward_direction) {
    const auto k = static_cast<std::size_t>(op);
    if (k >= kOperatorCount) throw InvalidArgument("update_success: invalid operator");
    ++stats.counts[k];
    if (quartile_improved(q_mean_t, q_mean_prev, reward_direction)) ++stats.successes[k];
}

namespace {

EpisodeLog run_episode_impl(const EpisodeSpec& spec, DdqnAgent* agent, const QNetwork* frozen) {
    const RunConfig& cfg = spec.cfg;
    const Problem& problem = spec.problem;
    const WeightSet weights =
        generate_weights(problem.n_obj(), divisions_for_population(problem.n_obj(), cfg.n_pop));
    const StepContext ctx{problem, weights, spec.params, cfg.g_max};

    Rng init_rng = make_rng(spec.seed, Stream::init);
    Rng op_rng = make_rng(spec.seed, Stream::operators);
    Rng policy_rng = make_rng(spec.seed, Stream::policy);
    Rng replay_rng = make_rng(spec.seed, Stream::replay);

    Population pop = random_population(problem, cfg.n_pop, init_rng, spec.params.es.initial_sigma);
    pop.refs = update_reference_points(pop.members, {});
    pop = rank_population(std::move(pop), weights);

    EpisodeStats stats;
    stats.observe(pop);
    stats.q_mean_prev = performance_quartiles(pop).mean;

    EpisodeLog log;
    log.records.reserve(static_cast<std::size_t>(cfg.g_max));
    StateVector state = encode_state(pop, stats, pop.generation, cfg.g_max);

    for (int g = 0; g < cfg.g_max; ++g) {
        OperatorId op = OperatorId::EO;
        switch (spec.policy.mode) {
            case PolicyMode::train: op = agent->act(state, spec.epsilon, policy_rng); break;
            case PolicyMode::eval:
                op = frozen ? static_cast<OperatorId>(argmax(frozen->forward(state)))
                            : static_cast<OperatorId>(argmax(agent->q_values(state)));
                break;
            case PolicyMode::fixed_op: op = spec.policy.fixed; break;
            case PolicyMode::random_op: op = random_select(policy_rng); break;
        }

        pop = step(op, std::move(pop), ctx, op_rng);
        stats.observe(pop);
        const double q_mean = performance_quartiles(pop).mean;
        const double reward = compute_reward(q_mean, stats.q_mean_prev, pop.generation, cfg.g_max, cfg);
        update_success(stats, op, q_mean, stats.q_mean_prev, cfg.reward_direction);
        stats.q_mean_prev = q_mean;

        StateVector next_state = encode_state(pop, stats, pop.generation, cfg.g_max);
        if (spec.policy.mode == PolicyMode::train)
            agent->observe({state, op, reward, next_state, pop.generation >= cfg.g_max}, replay_rng);

        log.records.push_back({pop.generation, op, reward, q_mean, std::move(state)});
        log.total_reward += reward;
        state = std::move(next_state);
    }
    log.final_population = std::move(pop);
    return log;
}

}  // namespace

EpisodeLog run_episode(const EpisodeSpec& spec, DdqnAgent* agent) {
    const bool needs_agent = spec.policy.mode == PolicyMode::train || spec.policy.mode == PolicyMode::eval;
    if (needs_agent && agent == nullptr) throw InvalidArgument("run_episode: this policy mode needs an agent");
    return run_episode_impl(spec, agent, nullptr);
}

EpisodeLog run_episode(const EpisodeSpec& spec, const QNetwork& network) {
    if (spec.policy.mode == PolicyMode::train) throw InvalidArgument("run_episode: a frozen network cannot train");
    if (network.input_size() != RunConfig::n_states || network.output_size() != kOperatorCount)
        throw InvalidArgument("run_episode: network shape does not match the state/action sizes");
    return run_episode_impl(spec, nullptr, &network);
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log) {
    out << "generation,operator,reward,quartile_mean";
    for (int i = 1; i <= RunConfig::n_states; ++i) out << ",s" << i;
    out << '\n';
    for (const GenerationRecord& rec : log.records) {
        out << rec.generation << ',' << to_string(rec.op) << ',' << fmt::format("{:.17g}", rec.reward) << ','
            << fmt::format("{:.17g}", rec.quartile_mean);
        for (double v : rec.state) out << ',' << fmt::format("{:.17g}", v);
        out << '\n';
    }
}

}  // namespace r2rl
