#include <doctest.h>

#include <r2rl/env.hpp>

#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace r2rl;

namespace {

Population with_performance(const std::vector<double>& perf, std::mt19937_64& g, std::size_t dim = 3) {
    Population p;
    for (double v : perf) {
        Individual ind;
        ind.x = oracle::random_vec(g, dim, -1.0, 1.0);
        ind.performance = v;
        p.members.push_back(ind);
    }
    return p;
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.n_pop = 20;
    cfg.g_max = 15;
    cfg.batch_size = 8;
    return cfg;
}

void check_state_bounds(const StateVector& s) {
    REQUIRE(s.size() == 20);
    for (std::size_t k = 0; k < 20; ++k) {
        CAPTURE(k);
        REQUIRE(std::isfinite(s[k]));
        if (k >= 6 && k < 10) {
            CHECK(s[k] >= 0.0);
        } else {
            CHECK(s[k] >= 0.0);
            CHECK(s[k] <= 1.0);
        }
    }
}

}  // namespace

TEST_CASE("degenerate populations encode to zero spreads") {
    std::mt19937_64 g(1);
    Population p = with_performance(std::vector<double>(10, 2.5), g);
    for (Individual& ind : p.members) ind.x = Vector(3, 0.1);
    EpisodeStats stats;
    stats.observe(p);
    const StateVector s = encode_state(p, stats, 0, 100);
    for (std::size_t k = 0; k < 5; ++k) CHECK(s[k] == 0.0);
    for (std::size_t k = 6; k < 10; ++k) CHECK(s[k] == 0.0);
    CHECK(s[5] == 1.0);
    check_state_bounds(s);
}

TEST_CASE("state feature examples") {
    std::mt19937_64 g(2);
    Population p = with_performance({1.0, 2.0, 3.0, 4.0, 5.0}, g);
    EpisodeStats stats;
    stats.observe(p);
    stats.counts[0] = 20;
    const StateVector s = encode_state(p, stats, 25, 100);
    CHECK(s[5] == 0.75);
    CHECK(s[10] == 0.2);

    stats.counts[0] = 4;
    stats.successes[0] = 3;
    const StateVector t = encode_state(p, stats, 25, 100);
    CHECK(t[15] == doctest::Approx(3.0 / (4.0 + 1e-6)).epsilon(1e-15));
    CHECK(std::fabs(t[15] - 0.74999981) < 1e-8);
    for (std::size_t k = 16; k < 20; ++k) CHECK(t[k] == 0.0);

    // Quartiles of 1..5 are 2, 3, 4 with mean 3, over a range of 4.
    CHECK(s[0] == doctest::Approx(0.25));
    CHECK(s[1] == doctest::Approx(0.5));
    CHECK(s[2] == doctest::Approx(0.75));
    CHECK(s[3] == doctest::Approx(0.5));
}

TEST_CASE("uninitialized statistics are rejected") {
    std::mt19937_64 g(3);
    const Population p = with_performance({1.0, 2.0}, g);
    CHECK_THROWS_AS(encode_state(p, EpisodeStats{}, 0, 10), InvalidArgument);
    CHECK_THROWS_AS(encode_state(Population{}, EpisodeStats{}, 0, 10), InvalidArgument);
}

TEST_CASE("quartile features match a sort-based oracle") {
    std::mt19937_64 g(4);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + g() % 60;
        const oracle::Vec perf = oracle::random_vec(g, n, 0.0, 50.0);
        const Population p = with_performance(perf, g);
        EpisodeStats stats;
        stats.observe(p);
        const double lo = *std::min_element(perf.begin(), perf.end());
        const double hi = *std::max_element(perf.begin(), perf.end());
        const double q1 = oracle::quantile(perf, 0.25), q2 = oracle::quantile(perf, 0.5),
                     q3 = oracle::quantile(perf, 0.75);
        const Quartiles q = performance_quartiles(p);
        CHECK(std::fabs(q.q1 - q1) <= 1e-12);
        CHECK(std::fabs(q.q2 - q2) <= 1e-12);
        CHECK(std::fabs(q.q3 - q3) <= 1e-12);
        const StateVector s = encode_state(p, stats, 3, 10);
        CHECK(std::fabs(s[0] - (q1 - lo) / (hi - lo)) <= 1e-12);
        CHECK(std::fabs(s[1] - (q2 - lo) / (hi - lo)) <= 1e-12);
        CHECK(std::fabs(s[2] - (q3 - lo) / (hi - lo)) <= 1e-12);
        CHECK(std::fabs(s[3] - ((q1 + q2 + q3) / 3.0 - lo) / (hi - lo)) <= 1e-12);
        check_state_bounds(s);
    }
}

TEST_CASE("nearest performance index breaks ties low") {
    std::mt19937_64 g(5);
    const Population p = with_performance({1.0, 3.0, 2.0, 3.0}, g);
    CHECK(nearest_performance_index(p, 2.5) == 1);
    CHECK(nearest_performance_index(p, 3.0) == 1);
    CHECK(nearest_performance_index(p, -4.0) == 0);
}

TEST_CASE("reward schedule") {
    const RunConfig cfg;
    CHECK(std::fabs(reward_scale(0, 100, cfg) - 1.0) <= 1e-12);
    CHECK(std::fabs(reward_scale(100, 100, cfg) - 5.0) <= 1e-12);
    CHECK(std::fabs(reward_scale(50, 100, cfg) - 4.5) <= 1e-12);
    CHECK(compute_reward(1.0, 2.0, 0, 100, cfg) == reward_scale(0, 100, cfg));
    CHECK(compute_reward(2.0, 2.0, 40, 100, cfg) == 0.0);
    CHECK(compute_reward(3.0, 2.0, 40, 100, cfg) == 0.0);
    double prev = 0.0;
    for (int t = 0; t <= 100; ++t) {
        const double v = reward_scale(t, 100, cfg);
        CHECK(v > prev);
        prev = v;
    }
    RunConfig flipped = cfg;
    flipped.reward_direction = -1;
    CHECK(compute_reward(3.0, 2.0, 100, 100, flipped) == doctest::Approx(5.0));
    CHECK(compute_reward(1.0, 2.0, 100, 100, flipped) == 0.0);
}

TEST_CASE("operator success bookkeeping") {
    EpisodeStats stats;
    update_success(stats, OperatorId::EO, 1.0, 2.0, 1);
    CHECK(stats.counts[0] == 1);
    CHECK(stats.successes[0] == 1);
    update_success(stats, OperatorId::EO, 2.0, 2.0, 1);
    CHECK(stats.counts[0] == 2);
    CHECK(stats.successes[0] == 1);
    CHECK_THROWS_AS(update_success(stats, static_cast<OperatorId>(9), 1.0, 2.0, 1), InvalidArgument);

    std::mt19937_64 g(6);
    EpisodeStats walk;
    double prev = 10.0;
    for (int i = 0; i < 1000; ++i) {
        const double q = oracle::random_vec(g, 1, 0.0, 20.0)[0];
        update_success(walk, static_cast<OperatorId>(g() % kOperatorCount), q, prev, 1);
        prev = q;
    }
    for (std::size_t k = 0; k < kOperatorCount; ++k) {
        CHECK(walk.successes[k] <= walk.counts[k]);
        CHECK(walk.successes[k] / (walk.counts[k] + kCountEpsilon) <= 1.0);
    }
}

TEST_CASE("episode contracts") {
    const RunConfig cfg = small_config();
    const OperatorParams params;
    const Problem problem(ProblemId::UF2);
    for (OperatorId op : kAllOperators) {
        const EpisodeLog log = run_episode({problem, cfg, params, Policy::fixed_operator(op), 3, 0.0}, nullptr);
        REQUIRE(log.records.size() == static_cast<std::size_t>(cfg.g_max));
        CHECK(log.final_population.size() == static_cast<std::size_t>(cfg.n_pop));
        for (std::size_t i = 0; i < log.records.size(); ++i) {
            CHECK(log.records[i].op == op);
            CHECK(log.records[i].generation == static_cast<int>(i) + 1);
        }
    }
    CHECK_THROWS_AS(run_episode({problem, cfg, params, Policy::train(), 3, 0.5}, nullptr), InvalidArgument);
    CHECK_THROWS_AS(run_episode({problem, cfg, params, Policy::greedy(), 3, 0.0}, nullptr), InvalidArgument);
    CHECK_THROWS_AS(run_episode({problem, cfg, params, Policy::train(), 3, 0.5}, QNetwork({20, 4, 5})),
                    InvalidArgument);
    CHECK_THROWS_AS(run_episode({problem, cfg, params, Policy::greedy(), 3, 0.0}, QNetwork({19, 4, 5})),
                    InvalidArgument);
}

TEST_CASE("episodes are reproducible and rewards lie on the schedule") {
    const RunConfig cfg = small_config();
    const OperatorParams params;
    for (ProblemId id : {ProblemId::UF1, ProblemId::UF6, ProblemId::UF9}) {
        const Problem problem(id);
        const EpisodeLog a = run_episode({problem, cfg, params, Policy::random(), 11, 0.0}, nullptr);
        const EpisodeLog b = run_episode({problem, cfg, params, Policy::random(), 11, 0.0}, nullptr);
        double total = 0.0;
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].op == b.records[i].op);
            CHECK(a.records[i].state == b.records[i].state);
            CHECK(a.records[i].reward == b.records[i].reward);
            const double r = a.records[i].reward;
            CHECK((r == 0.0 || r == reward_scale(a.records[i].generation, cfg.g_max, cfg)));
            check_state_bounds(a.records[i].state);
            total += r;
        }
        CHECK(a.total_reward == doctest::Approx(total).epsilon(1e-14));
    }
}

TEST_CASE("greedy episodes on a frozen network are bit identical") {
    RunConfig cfg = small_config();
    Rng init = make_rng(7, Stream::network);
    const QNetwork net = QNetwork::glorot(QNetwork::widths_for(cfg), init);
    const OperatorParams params;
    const Problem problem(ProblemId::UF3);
    std::ostringstream a, b;
    write_episode_csv(a, run_episode({problem, cfg, params, Policy::greedy(), 21, 0.0}, net));
    write_episode_csv(b, run_episode({problem, cfg, params, Policy::greedy(), 21, 0.0}, net));
    CHECK(a.str() == b.str());
    std::string header;
    std::istringstream in(a.str());
    std::getline(in, header);
    CHECK(header.rfind("generation,operator,reward,quartile_mean,s1,s2,", 0) == 0);
    CHECK(header.substr(header.size() - 4) == ",s20");
}

TEST_CASE("training episodes feed the agent") {
    RunConfig cfg = small_config();
    Rng init = make_rng(8, Stream::network);
    DdqnAgent agent(cfg, init);
    const OperatorParams params;
    const Problem problem(ProblemId::UF1);
    const EpisodeLog log = run_episode({problem, cfg, params, Policy::train(), 8, 0.5}, &agent);
    CHECK(agent.buffer().size() == static_cast<std::size_t>(cfg.g_max));
    CHECK(agent.updates() == cfg.g_max - cfg.batch_size + 1);
    for (std::size_t i = 0; i + 1 < agent.buffer().size(); ++i) {
        CHECK_FALSE(agent.buffer().at(i).terminal);
        CHECK(agent.buffer().at(i).s_next == agent.buffer().at(i + 1).s);
    }
    CHECK(agent.buffer().at(agent.buffer().size() - 1).terminal);
    CHECK(agent.buffer().at(0).r == log.records[0].reward);
}

TEST_CASE("running extremes are monotone within an episode") {
    // Replays an episode by hand and checks f_min never rises and f_max never falls.
    const RunConfig cfg = small_config();
    const OperatorParams params;
    const Problem problem(ProblemId::UF4);
    const WeightSet weights = generate_weights(2, divisions_for_population(2, cfg.n_pop));
    const StepContext ctx{problem, weights, params, cfg.g_max};
    Rng init = make_rng(4, Stream::init), ops = make_rng(4, Stream::operators), pick = make_rng(4, Stream::policy);
    Population pop = random_population(problem, cfg.n_pop, init, params.es.initial_sigma);
    pop.refs = update_reference_points(pop.members, {});
    pop = rank_population(std::move(pop), weights);
    EpisodeStats stats;
    stats.observe(pop);
    for (int g = 0; g < 30; ++g) {
        const double lo = stats.f_min, hi = stats.f_max;
        pop = step(random_select(pick), std::move(pop), ctx, ops);
        stats.observe(pop);
        CHECK(stats.f_min <= lo);
        CHECK(stats.f_max >= hi);
        CHECK(stats.f_min <= stats.f_max);
        check_state_bounds(encode_state(pop, stats, std::min(g + 1, cfg.g_max), cfg.g_max));
    }
}
