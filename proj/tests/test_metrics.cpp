#include <doctest.h>

#include <r2rl/metrics.hpp>
#include <r2rl/problems.hpp>
#include <r2rl/r2rank.hpp>

#include "oracles.hpp"

#include <cmath>

using namespace r2rl;

namespace {

// Textbook rank-sum form: 12 / (n k (k+1)) * sum R_j^2 - 3 n (k+1), with mid-ranks
// found by counting smaller and equal entries.
std::pair<double, oracle::Vec> friedman_oracle(const std::vector<oracle::Vec>& t) {
    const std::size_t n = t.size(), k = t.front().size();
    oracle::Vec sums(k, 0.0);
    for (const auto& row : t)
        for (std::size_t j = 0; j < k; ++j) {
            int less = 0, equal = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (row[i] < row[j]) ++less;
                if (row[i] == row[j]) ++equal;
            }
            sums[j] += less + (equal + 1) / 2.0;
        }
    double sq = 0.0;
    for (double r : sums) sq += r * r;
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    oracle::Vec means(k);
    for (std::size_t j = 0; j < k; ++j) means[j] = sums[j] / nn;
    return {12.0 / (nn * kk * (kk + 1.0)) * sq - 3.0 * nn * (kk + 1.0), means};
}

std::vector<oracle::Vec> random_set(std::mt19937_64& g, std::size_t n, std::size_t m) {
    std::vector<oracle::Vec> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_vec(g, m, -2.0, 3.0));
    return out;
}

}  // namespace

TEST_CASE("IGD examples") {
    const std::vector<Vector> r{{0, 0}, {1, 1}};
    CHECK(igd(r, r) == 0.0);
    CHECK(igd({{0, 0}}, r) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(std::fabs(igd({{0, 0}}, r) - 0.70710678) < 1e-8);
    CHECK_THROWS_AS(igd({}, r), InvalidArgument);
    CHECK_THROWS_AS(igd(r, {}), InvalidArgument);
    CHECK_THROWS_AS(igd({{0, 0, 0}}, r), InvalidArgument);
}

TEST_CASE("IGD agrees with the brute-force oracle") {
    std::mt19937_64 g(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + g() % 2;
        const auto p = random_set(g, 1 + g() % 30, m);
        const auto r = random_set(g, 1 + g() % 40, m);
        CHECK(std::fabs(igd(p, r) - oracle::igd(p, r)) <= 1e-12);
    }
}

TEST_CASE("IGD properties") {
    std::mt19937_64 g(2);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_set(g, 10, 2);
        auto r = random_set(g, 25, 2);
        const double base = igd(p, r);
        const oracle::Vec shift = oracle::random_vec(g, 2, -10.0, 10.0);
        auto ps = p, rs = r;
        for (auto& v : ps)
            for (std::size_t k = 0; k < 2; ++k) v[k] += shift[k];
        for (auto& v : rs)
            for (std::size_t k = 0; k < 2; ++k) v[k] += shift[k];
        CHECK(igd(ps, rs) == doctest::Approx(base).epsilon(1e-12));

        p.push_back({100.0, 100.0});
        CHECK(igd(p, r) <= base);
    }
}

TEST_CASE("spacing examples") {
    CHECK(spacing({{0, 0}, {1, 0}, {2, 0}, {3, 0}}) == 0.0);
    // D = (1, 1, 2), D_m = 4/3, squared deviations 1/9 + 1/9 + 4/9.
    const double sp = spacing({{0, 0}, {1, 0}, {3, 0}});
    CHECK(sp == doctest::Approx(std::sqrt(6.0 / 9.0) / 4.0).epsilon(1e-15));
    CHECK(std::fabs(sp - 0.20412415) < 1e-8);
    CHECK_THROWS_AS(spacing({{0, 0}}), InvalidArgument);
    CHECK_THROWS_AS(spacing({{1, 1}, {1, 1}, {1, 1}}), InvalidArgument);
    // Schott's form on the same set: sqrt((1/9 + 1/9 + 4/9) / 2).
    CHECK(schott_spacing({{0, 0}, {1, 0}, {3, 0}}) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("spacing matches the oracle and is scale and translation invariant") {
    std::mt19937_64 g(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_set(g, 2 + g() % 20, 2 + g() % 2);
        const double base = spacing(p);
        CHECK(std::fabs(base - oracle::spacing(p)) <= 1e-12);
        const double c = oracle::random_vec(g, 1, 0.1, 10.0)[0];
        const double shift = oracle::random_vec(g, 1, -5.0, 5.0)[0];
        for (auto& v : p)
            for (double& x : v) x = c * x + shift;
        CHECK(spacing(p) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("summaries") {
    const Summary one = summarize(Vector{2.0});
    CHECK(one.mean == 2.0);
    CHECK(one.min == 2.0);
    CHECK(one.std == 0.0);
    const Summary two = summarize(Vector{1.0, 3.0});
    CHECK(two.mean == 2.0);
    CHECK(two.min == 1.0);
    CHECK(two.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(summarize(Vector(7, 0.3)).std == doctest::Approx(0.0));
    CHECK_THROWS_AS(summarize(Vector{}), InvalidArgument);

    std::mt19937_64 g(4);
    for (int trial = 0; trial < 50; ++trial) {
        const oracle::Vec v = oracle::random_vec(g, 1 + g() % 30, -3.0, 8.0);
        const Summary s = summarize(v);
        CHECK(s.min <= s.mean);
        CHECK(s.std >= 0.0);
    }
}

TEST_CASE("quantiles") {
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
    CHECK(quantile({5.0}, 0.25) == 5.0);
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 100; ++trial) {
        const oracle::Vec v = oracle::random_vec(g, 1 + g() % 40, 0.0, 1.0);
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(quantile(v, q) == doctest::Approx(oracle::quantile(v, q)));
    }
}

TEST_CASE("Friedman hand table") {
    const FriedmanResult f = friedman({{1, 2, 3}, {2, 1, 3}, {1, 3, 2}});
    CHECK(f.statistic == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(f.degrees_of_freedom == 2);
    REQUIRE(f.mean_ranks.size() == 3);
    CHECK(f.mean_ranks[0] == doctest::Approx(4.0 / 3.0));
    CHECK(f.mean_ranks[1] == doctest::Approx(2.0));
    CHECK(f.mean_ranks[2] == doctest::Approx(8.0 / 3.0));
    // Chi-square with two degrees of freedom has survival exp(-x / 2).
    CHECK(f.p_value == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("Friedman edge cases and oracle") {
    const FriedmanResult same = friedman({{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}, {0.9, 0.9, 0.9}});
    CHECK(same.statistic == 0.0);
    for (double r : same.mean_ranks) CHECK(r == 2.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    std::mt19937_64 g(6);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + g() % 10, k = 2 + g() % 6;
        std::vector<Vector> t(n, Vector(k));
        for (auto& row : t)
            for (double& v : row) v = static_cast<double>(g() % 4);  // coarse values force ties
        const auto [stat, means] = friedman_oracle(t);
        const FriedmanResult f = friedman(t);
        CHECK(f.statistic == doctest::Approx(stat).epsilon(1e-10).scale(1.0));
        for (std::size_t j = 0; j < k; ++j) CHECK(f.mean_ranks[j] == doctest::Approx(means[j]));
        CHECK(f.p_value >= 0.0);
        CHECK(f.p_value <= 1.0);

        // A column that beats every other in every row holds mean rank 1.
        for (auto& row : t) row[0] = -1.0;
        CHECK(friedman(t).mean_ranks[0] == 1.0);
    }

    CHECK_THROWS_AS(friedman({{1, 2, 3}}), InvalidArgument);
    CHECK_THROWS_AS(friedman({{1}, {2}}), InvalidArgument);
    CHECK_THROWS_AS(friedman({{1, 2}, {1, 2, 3}}), InvalidArgument);
    CHECK_THROWS_AS(friedman({}), InvalidArgument);
}

TEST_CASE("final solution set is rank one and non-dominated") {
    const Problem problem(ProblemId::UF2);
    const WeightSet w = generate_weights(2, divisions_for_population(2, 30));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng = make_rng(seed, Stream::init);
        Population p = random_population(problem, 30, rng);
        p.refs = update_reference_points(p.members, {});
        p = rank_population(std::move(p), w);
        const auto set = final_solution_set(p);
        REQUIRE_FALSE(set.empty());
        for (const Vector& a : set) {
            bool from_rank_one = false;
            for (const Individual& ind : p.members)
                if (ind.f == a && ind.r2_rank == 1) from_rank_one = true;
            CHECK(from_rank_one);
            for (const Vector& b : set) CHECK_FALSE(dominates(b, a));
        }
    }
    CHECK_THROWS_AS(final_solution_set(Population{}), InvalidArgument);
}
