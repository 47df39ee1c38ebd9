#include <doctest.h>

#include <r2rl/problems.hpp>
#include <r2rl/r2rank.hpp>

#include "oracles.hpp"

#include <cmath>
#include <map>

using namespace r2rl;

namespace {

std::vector<Individual> individuals(const std::vector<Vector>& fs) {
    std::vector<Individual> out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        Individual ind;
        ind.x = {static_cast<double>(i)};
        ind.f = fs[i];
        out.push_back(ind);
    }
    return out;
}

Population population(const std::vector<Vector>& fs) {
    Population p;
    p.members = individuals(fs);
    return p;
}

std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

}  // namespace

TEST_CASE("simplex lattice weights") {
    const WeightSet w2 = generate_weights(2, 2);
    REQUIRE(w2.size() == 3);
    // (0,1), (0.5,0.5), (1,0) with zeros raised to 1e-6 and renormalized
    const double lo = 1e-6 / (1.0 + 1e-6);
    const double hi = 1.0 / (1.0 + 1e-6);
    CHECK(w2.weights[0][0] == doctest::Approx(lo).epsilon(1e-15));
    CHECK(w2.weights[0][1] == doctest::Approx(hi).epsilon(1e-15));
    CHECK(w2.weights[1] == Vector{0.5, 0.5});
    CHECK(w2.weights[2][0] == doctest::Approx(hi).epsilon(1e-15));

    CHECK(generate_weights(3, 2).size() == 6);
    for (int m : {2, 3})
        for (int h : {1, 2, 5, 13, 99}) {
            const WeightSet w = generate_weights(m, h);
            CHECK(w.size() == binomial(h + m - 1, m - 1));
            for (const Vector& v : w.weights) {
                double s = 0.0;
                for (double c : v) {
                    CHECK(c > 0.0);
                    s += c;
                }
                CHECK(std::fabs(s - 1.0) <= 1e-12);
            }
        }
    CHECK_THROWS_AS(generate_weights(4, 3), InvalidArgument);
    CHECK_THROWS_AS(generate_weights(2, 0), InvalidArgument);
}

TEST_CASE("weight-set size tracks the population size") {
    CHECK(divisions_for_population(2, 100) == 99);
    CHECK(generate_weights(2, divisions_for_population(2, 100)).size() == 100);
    CHECK(divisions_for_population(3, 100) == 13);
    CHECK(generate_weights(3, 13).size() == 105);
    CHECK(generate_weights(3, 12).size() < 100);
}

TEST_CASE("asf examples") {
    CHECK(asf(Vector{1, 1}, Vector{0.5, 0.5}, Vector{0, 0}) == 2.0);
    CHECK(asf(Vector{0.4, 0.7}, Vector{0.3, 0.7}, Vector{0.4, 0.7}) == 0.0);
    CHECK(asf(Vector{0.3, 0.9}, Vector{0.25, 0.75}, Vector{0, 0}) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK_THROWS_AS(asf(Vector{1, 1}, Vector{0.0, 1.0}, Vector{0, 0}), InvalidArgument);
    CHECK_THROWS_AS(asf(Vector{1, 1}, Vector{-0.5, 1.5}, Vector{0, 0}), InvalidArgument);
}

TEST_CASE("asf scales linearly") {
    std::mt19937_64 g(21);
    for (int t = 0; t < 200; ++t) {
        const Vector f = oracle::random_vec(g, 3, 0.0, 4.0);
        const Vector w = oracle::random_weight(g, 3);
        const double c = oracle::random_vec(g, 1, 0.1, 10.0)[0];
        Vector cf = f;
        for (double& v : cf) v *= c;
        const Vector z(3, 0.0);
        CHECK(oracle::close(asf(cf, w, z), c * asf(f, w, z), 1e-12));
    }
}

TEST_CASE("r2 indicator examples") {
    WeightSet one;
    one.weights = {{0.25, 0.75}};
    const Vector z{0, 0};
    CHECK(r2_indicator({{0.3, 0.9}}, one, z) == asf(Vector{0.3, 0.9}, one.weights[0], z));
    CHECK(r2_indicator({{1, 2}, {0, 0}}, generate_weights(2, 4), z) == 0.0);
    CHECK_THROWS_AS(r2_indicator({}, one, z), InvalidArgument);

    std::mt19937_64 g(5);
    for (int t = 0; t < 100; ++t) {
        std::vector<Vector> pts;
        WeightSet ws;
        for (int i = 0; i < 3; ++i) pts.push_back(oracle::random_vec(g, 2, 0.0, 2.0));
        for (int i = 0; i < 3; ++i) ws.weights.push_back(oracle::random_weight(g, 2));
        CHECK(oracle::close(r2_indicator(pts, ws, z), oracle::r2(pts, ws.weights, z), 1e-12));
    }
}

TEST_CASE("adding a point never increases R2") {
    std::mt19937_64 g(8);
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = t % 2 ? 3 : 2;
        std::vector<Vector> pts;
        for (int i = 0; i < 6; ++i) pts.push_back(oracle::random_vec(g, m, 0.0, 3.0));
        const WeightSet ws = generate_weights(static_cast<int>(m), 6);
        const Vector z(m, -0.1);
        const double before = r2_indicator(pts, ws, z);
        pts.push_back(oracle::random_vec(g, m, 0.0, 3.0));
        CHECK(r2_indicator(pts, ws, z) <= before);
    }
}

TEST_CASE("ranking: single and duplicated individuals") {
    const WeightSet ws = generate_weights(2, 5);
    const Population one = rank_population(population({{0.3, 0.8}}), ws);
    CHECK(one.members[0].r2_rank == 1);

    const Population dup = rank_population(population({{0.2, 0.9}, {0.6, 0.4}, {0.2, 0.9}, {1.0, 1.0}}), ws);
    std::map<double, std::pair<int, double>> by_x;
    for (const Individual& ind : dup.members) by_x[ind.x[0]] = {ind.r2_rank, ind.l2_norm};
    CHECK(by_x[0.0] == by_x[2.0]);
    CHECK_THROWS_AS(rank_population(Population{}, ws), InvalidArgument);
}

TEST_CASE("ranking: hand example") {
    Population p = population({{1, 0}, {0, 1}, {0.5, 0.5}});
    p.refs.z_star = {0, 0};
    p.refs.z_nad = {1, 1};
    p.refs.z_worst = {1, 1};
    WeightSet ws;
    ws.weights = {{0.5, 0.5}};
    // ASF values 2, 2, 1: (0.5,0.5) is first; the other two tie on ASF and on norm 1.
    const Population r = rank_population(p, ws);
    CHECK(r.members[0].f == Vector{0.5, 0.5});
    CHECK(r.members[0].r2_rank == 1);
    CHECK(r.members[1].f == Vector{1, 0});
    CHECK(r.members[2].f == Vector{0, 1});
    CHECK(r.members[1].r2_rank == 2);
    CHECK(r.members[2].r2_rank == 2);
    for (const Individual& ind : r.members) CHECK(ind.performance == ind.r2_rank + ind.l2_norm);
}

TEST_CASE("ranking agrees with the brute-force oracle") {
    std::mt19937_64 g(99);
    for (int t = 0; t < 300; ++t) {
        const std::size_t m = t % 2 ? 3 : 2;
        const std::size_t n = 1 + t % 20;
        std::vector<Vector> fs;
        for (std::size_t i = 0; i < n; ++i) fs.push_back(oracle::random_vec(g, m, 0.0, 2.0));
        if (t % 5 == 0 && n > 2) fs[1] = fs[0];  // exercise ties
        WeightSet ws;
        const std::size_t nw = 1 + t % 10;
        for (std::size_t k = 0; k < nw; ++k) ws.weights.push_back(oracle::random_weight(g, m));

        Population p = population(fs);
        p.refs = update_reference_points(p.members, {});
        const oracle::Ranked expect = oracle::rank(fs, p.refs.z_star, p.refs.z_nad, ws.weights);
        const Population r = rank_population(p, ws);
        REQUIRE(r.size() == n);
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t src = expect.order[pos];
            CHECK(r.members[pos].x[0] == static_cast<double>(src));
            CHECK(r.members[pos].r2_rank == expect.rank[src]);
            CHECK(oracle::close(r.members[pos].l2_norm, oracle::norm(fs[src]), 1e-12));
            CHECK(oracle::close(r.members[pos].performance, expect.rank[src] + oracle::norm(fs[src]), 1e-12));
        }
    }
}

TEST_CASE("ranked populations: rank 1 exists, order holds, multiplicity bounded") {
    std::mt19937_64 g(4);
    for (int t = 0; t < 100; ++t) {
        const int m = t % 2 ? 3 : 2;
        std::vector<Vector> fs;
        for (int i = 0; i < 40; ++i) fs.push_back(oracle::random_vec(g, static_cast<std::size_t>(m), 0.0, 5.0));
        const WeightSet ws = generate_weights(m, m == 2 ? 7 : 3);
        const Population r = rank_population(population(fs), ws);
        CHECK(r.members.front().r2_rank == 1);
        std::map<int, std::size_t> count;
        for (std::size_t i = 0; i < r.size(); ++i) {
            ++count[r.members[i].r2_rank];
            if (i > 0) {
                const auto& a = r.members[i - 1];
                const auto& b = r.members[i];
                CHECK((a.r2_rank < b.r2_rank || (a.r2_rank == b.r2_rank && a.l2_norm <= b.l2_norm)));
            }
        }
        // Continuous random objectives never tie, so each weight places one member per position.
        for (const auto& [rank, c] : count) CHECK(c <= ws.size());
    }
}

TEST_CASE("reference points") {
    const auto pts = individuals({{0, 2}, {2, 0}});
    const ReferencePoints r = update_reference_points(pts, {}, 0.0);
    CHECK(r.z_star == Vector{0, 0});
    CHECK(r.z_nad == Vector{2, 2});

    const ReferencePoints again = update_reference_points(pts, r, 0.0);
    CHECK(again.z_star == r.z_star);
    CHECK(again.z_nad == r.z_nad);

    const ReferencePoints eps = update_reference_points(pts, {});
    CHECK(eps.z_star == Vector{-1e-4, -1e-4});
    const ReferencePoints eps2 = update_reference_points(pts, eps);
    CHECK(eps2.z_star == eps.z_star);
    CHECK(eps2.z_nad == eps.z_nad);

    auto lower = individuals({{0, 2}, {2, 0}, {-1, 3}});
    const ReferencePoints moved = update_reference_points(lower, r, 0.0);
    CHECK(moved.z_star[0] == -1.0);
    CHECK(moved.z_star[1] == 0.0);
}

TEST_CASE("nadir relaxes when the front collapses") {
    // One non-dominated vector in two objectives: midpoint between it and the worst values.
    const auto pts = individuals({{1, 1}, {2, 3}, {3, 2}});
    const ReferencePoints r = update_reference_points(pts, {}, 0.0);
    CHECK(r.z_nad == Vector{2.0, 2.0});
    for (std::size_t i = 0; i < 2; ++i) CHECK(r.z_star[i] <= r.z_nad[i]);
}

TEST_CASE("normalized non-dominated objectives stay in the unit box") {
    std::mt19937_64 g(17);
    const double eps = 1e-4;
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = t % 2 ? 3 : 2;
        std::vector<Vector> fs;
        for (int i = 0; i < 30; ++i) fs.push_back(oracle::random_vec(g, m, 0.0, 10.0));
        const auto members = individuals(fs);
        const ReferencePoints r = update_reference_points(members, {}, eps);
        for (std::size_t idx : nondominated_indices(members)) {
            const Vector n = normalize_objectives(members[idx].f, r);
            for (std::size_t k = 0; k < m; ++k) {
                CHECK(n[k] >= 0.0);
                CHECK(n[k] <= 1.0 + eps / (r.z_nad[k] - r.z_star[k]) + 1e-12);
            }
        }
    }
}

TEST_CASE("utopian point lower-bounds every objective seen") {
    std::mt19937_64 g(23);
    ReferencePoints r;
    std::vector<Vector> seen;
    for (int gen = 0; gen < 50; ++gen) {
        std::vector<Vector> fs;
        for (int i = 0; i < 10; ++i) fs.push_back(oracle::random_vec(g, 2, -gen * 0.1, 5.0));
        seen.insert(seen.end(), fs.begin(), fs.end());
        r = update_reference_points(individuals(fs), r);
        for (const Vector& f : seen)
            for (std::size_t k = 0; k < 2; ++k) CHECK(r.z_star[k] <= f[k]);
    }
}
