#include <doctest.h>

#include <r2rl/metrics.hpp>
#include <r2rl/problems.hpp>

#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace r2rl;

namespace {

const std::vector<ProblemId> kAll = {ProblemId::UF1, ProblemId::UF2, ProblemId::UF3, ProblemId::UF4, ProblemId::UF5,
                                     ProblemId::UF6, ProblemId::UF7, ProblemId::UF8, ProblemId::UF9, ProblemId::UF10};

// Front relations from the CEC 2009 report, residual form (0 on the front).
double front_residual(ProblemId id, const Vector& f) {
    switch (id) {
        case ProblemId::UF1:
        case ProblemId::UF2:
        case ProblemId::UF3: return f[1] - (1.0 - std::sqrt(f[0]));
        case ProblemId::UF4: return f[1] - (1.0 - f[0] * f[0]);
        case ProblemId::UF5:
        case ProblemId::UF6:
        case ProblemId::UF7: return f[1] - (1.0 - f[0]);
        case ProblemId::UF8:
        case ProblemId::UF10: return f[0] * f[0] + f[1] * f[1] + f[2] * f[2] - 1.0;
        case ProblemId::UF9: return f[0] + f[1] + f[2] - 1.0;
    }
    return 1.0;
}

// Leading parameter values that lie on each problem's Pareto set.
double optimal_t(ProblemId id, int i, int count) {
    const double s = static_cast<double>(i) / (count - 1);
    switch (id) {
        case ProblemId::UF5: return static_cast<double>(i % 21) / 20.0;
        case ProblemId::UF6:
            if (i == 0) return 0.0;
            return s <= 0.5 ? 0.25 + 0.5 * s : 0.75 + 0.5 * (s - 0.5);
        default: return s;
    }
}

}  // namespace

TEST_CASE("objective counts, dimensions and names") {
    for (ProblemId id : kAll) {
        const Problem p(id);
        CHECK(p.dim() == 30);
        CHECK(p.n_obj() == (static_cast<int>(id) <= 7 ? 2 : 3));
        CHECK(parse_problem(to_string(id)) == id);
        CHECK(p.bounds().size() == 30);
    }
    CHECK_FALSE(parse_problem("UF11").has_value());
}

TEST_CASE("bounds") {
    const Problem uf1(ProblemId::UF1);
    CHECK(uf1.bounds().lower[0] == 0.0);
    CHECK(uf1.bounds().upper[0] == 1.0);
    for (std::size_t j = 1; j < 30; ++j) {
        CHECK(uf1.bounds().lower[j] == -1.0);
        CHECK(uf1.bounds().upper[j] == 1.0);
    }
    const Problem uf3(ProblemId::UF3);
    for (std::size_t j = 0; j < 30; ++j) {
        CHECK(uf3.bounds().lower[j] == 0.0);
        CHECK(uf3.bounds().upper[j] == 1.0);
    }
    const Problem uf4(ProblemId::UF4);
    CHECK(uf4.bounds().upper[0] == 1.0);
    CHECK(uf4.bounds().lower[5] == -2.0);
    CHECK(uf4.bounds().upper[5] == 2.0);
    const Problem uf8(ProblemId::UF8);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(uf8.bounds().lower[j] == 0.0);
        CHECK(uf8.bounds().upper[j] == 1.0);
    }
    for (std::size_t j = 2; j < 30; ++j) {
        CHECK(uf8.bounds().lower[j] == -2.0);
        CHECK(uf8.bounds().upper[j] == 2.0);
    }
}

TEST_CASE("two-objective Pareto-set points map onto the analytic front") {
    for (ProblemId id : {ProblemId::UF1, ProblemId::UF2, ProblemId::UF3, ProblemId::UF4, ProblemId::UF5, ProblemId::UF6,
                         ProblemId::UF7}) {
        CAPTURE(to_string(id));
        const Problem p(id);
        for (int i = 0; i < 100; ++i) {
            const double t = optimal_t(id, i, 100);
            const Vector f = p.evaluate(p.pareto_set_point(t));
            CHECK(std::fabs(front_residual(id, f)) <= 1e-9);
            // UF7 maps x1 through a fifth root; the others use x1 directly.
            const double f1 = id == ProblemId::UF7 ? std::pow(t, 0.2) : t;
            CHECK(std::fabs(f[0] - f1) <= 1e-9);
        }
    }
}

TEST_CASE("three-objective Pareto-set points map onto the analytic front") {
    for (ProblemId id : {ProblemId::UF8, ProblemId::UF9, ProblemId::UF10}) {
        CAPTURE(to_string(id));
        const Problem p(id);
        for (int i = 0; i < 10; ++i)
            for (int k = 0; k < 10; ++k) {
                double t = i / 9.0;
                if (id == ProblemId::UF9) t = i < 5 ? 0.25 * i / 4.0 : 0.75 + 0.25 * (i - 5) / 4.0;
                const Vector f = p.evaluate(p.pareto_set_point(t, k / 9.0));
                CHECK(std::fabs(front_residual(id, f)) <= 1e-9);
            }
    }
}

TEST_CASE("UF1 off the Pareto set is dominated by the front") {
    const Problem p(ProblemId::UF1);
    Vector x = p.pareto_set_point(0.3);
    x[4] += 0.2;
    const Vector f = p.evaluate(x);
    CHECK(f[1] > 1.0 - std::sqrt(f[0]));
}

TEST_CASE("UF4 stays finite with a bounded first objective") {
    const Problem p(ProblemId::UF4);
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 1000; ++trial) {
        Vector x(30);
        x[0] = oracle::random_vec(g, 1, 0.0, 1.0)[0];
        const Vector rest = oracle::random_vec(g, 29, -2.0, 2.0);
        std::copy(rest.begin(), rest.end(), x.begin() + 1);
        const Vector f = p.evaluate(x);
        CHECK(std::isfinite(f[0]));
        CHECK(std::isfinite(f[1]));
        // h(t) = |t| / (1 + e^{2|t|}) never exceeds 0.14, and the group mean is doubled.
        CHECK(f[0] >= 0.0);
        CHECK(f[0] <= 1.0 + 2.0 * 0.14);
    }
}

TEST_CASE("evaluate is pure and validates the dimension") {
    std::mt19937_64 g(3);
    for (ProblemId id : kAll) {
        const Problem p(id);
        Vector x(30);
        for (std::size_t j = 0; j < 30; ++j)
            x[j] = oracle::random_vec(g, 1, p.bounds().lower[j], p.bounds().upper[j])[0];
        const Vector a = p.evaluate(x);
        CHECK(a == p.evaluate(x));
        CHECK(a.size() == static_cast<std::size_t>(p.n_obj()));
        CHECK_THROWS_AS(p.evaluate(Vector(29, 0.0)), InvalidArgument);
    }
}

TEST_CASE("front samples satisfy their closed forms") {
    const auto uf1 = Problem(ProblemId::UF1).pareto_front_samples(3);
    REQUIRE(uf1.size() == 3);
    for (const Vector& f : uf1) CHECK(std::fabs(front_residual(ProblemId::UF1, f)) <= 1e-12);

    const auto uf4 = Problem(ProblemId::UF4).pareto_front_samples(2);
    REQUIRE(uf4.size() == 2);
    CHECK(uf4.front() == Vector{0.0, 1.0});
    CHECK(uf4.back() == Vector{1.0, 0.0});

    for (ProblemId id : kAll) {
        CAPTURE(to_string(id));
        const Problem p(id);
        const auto front = p.pareto_front_samples(p.default_front_size());
        CHECK(front.size() >= (id == ProblemId::UF5 ? 21u : static_cast<std::size_t>(p.default_front_size())));
        for (const Vector& f : front) {
            REQUIRE(f.size() == static_cast<std::size_t>(p.n_obj()));
            CHECK(std::fabs(front_residual(id, f)) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(Problem(ProblemId::UF1).pareto_front_samples(1), InvalidArgument);
}

TEST_CASE("UF6 and UF9 fronts respect their gaps") {
    for (const Vector& f : Problem(ProblemId::UF6).pareto_front_samples(200)) {
        const bool ok = f[0] == 0.0 || (f[0] >= 0.25 - 1e-12 && f[0] <= 0.5 + 1e-12) || f[0] >= 0.75 - 1e-12;
        CHECK(ok);
    }
    for (const Vector& f : Problem(ProblemId::UF9).pareto_front_samples(500)) {
        // On the front f1 = x1 x2, f2 = (1 - x1) x2, f3 = 1 - x2, with x1 outside (1/4, 3/4).
        const double x2 = 1.0 - f[2];
        if (x2 < 1e-12) continue;
        const double x1 = f[0] / x2;
        CHECK((x1 <= 0.25 + 1e-9 || x1 >= 0.75 - 1e-9));
    }
}

TEST_CASE("front samples are mutually non-dominated") {
    for (ProblemId id : kAll) {
        CAPTURE(to_string(id));
        const auto front = Problem(id).pareto_front_samples(300);
        for (std::size_t i = 0; i < front.size(); ++i)
            for (std::size_t j = 0; j < front.size(); ++j)
                if (i != j) REQUIRE_FALSE(dominates(front[i], front[j]));
    }
}

TEST_CASE("IGD of the front against itself is zero") {
    for (ProblemId id : kAll) {
        const Problem p(id);
        const auto front = p.pareto_front_samples(id == ProblemId::UF8 || id == ProblemId::UF9 || id == ProblemId::UF10
                                                      ? 1000
                                                      : p.default_front_size());
        CHECK(igd(front, front) == 0.0);
    }
}

TEST_CASE("front CSV export") {
    std::ostringstream out;
    write_front_csv(out, Problem(ProblemId::UF8).pareto_front_samples(3));
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "f1,f2,f3");
}
