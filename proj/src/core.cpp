#include <r2rl/core.hpp>
#include <r2rl/problems.hpp>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace r2rl {

void RunConfig::validate() const {
    if (n_pop < 4) throw InvalidArgument(fmt::format("n_pop must be >= 4, got {}", n_pop));
    if (g_max < 1) throw InvalidArgument(fmt::format("g_max must be >= 1, got {}", g_max));
    if (n_game < 1) throw InvalidArgument(fmt::format("n_game must be >= 1, got {}", n_game));
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument(fmt::format("gamma must lie in [0,1], got {}", gamma));
    if (!(eps_final > 0.0 && eps_final < eps_initial && eps_initial <= 1.0))
        throw InvalidArgument(
            fmt::format("need 0 < eps_final < eps_initial <= 1, got {} and {}", eps_final, eps_initial));
    if (replay_size < 1 || batch_size < 1 || batch_size > replay_size)
        throw InvalidArgument("need 1 <= batch_size <= replay_size");
    if (hidden_nodes < 1 || hidden_layers < 1) throw InvalidArgument("network needs at least one hidden unit");
    if (power_p < 0) throw InvalidArgument("power_p must be nonnegative");
    if (target_sync < 1) throw InvalidArgument("target_sync must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
    if (reward_direction != 1 && reward_direction != -1) throw InvalidArgument("reward_direction must be 1 or -1");
}

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("euclidean_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, Stream tag, std::uint64_t index) {
    return mix64(mix64(root ^ mix64(static_cast<std::uint64_t>(tag))) + index);
}

Rng make_rng(std::uint64_t root, Stream tag, std::uint64_t index) { return Rng(derive_seed(root, tag, index)); }

// Hand-rolled draws so streams are identical across standard library implementations.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(Rng& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw InvalidArgument("uniform_index: empty range");
    // Lemire's nearly-divisionless rejection.
    const std::uint64_t range = n;
    std::uint64_t x = rng();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = -range % range;
        while (low < threshold) {
            x = rng();
            m = static_cast<__uint128_t>(x) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

Vector clip_to_bounds(std::span<const double> x, const Bounds& bounds) {
    if (x.size() != bounds.size())
        throw InvalidArgument(fmt::format("clip_to_bounds: vector has {} components, bounds {}", x.size(), bounds.size()));
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(bounds.upper[i], std::max(bounds.lower[i], x[i]));
    return out;
}

Individual make_individual(const Problem& problem, Vector x, double sigma) {
    Individual ind;
    ind.f = problem.evaluate(x);
    ind.x = std::move(x);
    ind.l2_norm = euclidean_norm(ind.f);
    ind.sigma = sigma;
    return ind;
}

Population random_population(const Problem& problem, int n_pop, Rng& rng, double sigma0) {
    if (n_pop <= 0) throw InvalidArgument("random_population: n_pop must be positive");
    const Bounds& b = problem.bounds();
    Population pop;
    pop.members.reserve(static_cast<std::size_t>(n_pop));
    for (int i = 0; i < n_pop; ++i) {
        Vector x(b.size());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = uniform(rng, b.lower[j], b.upper[j]);
        pop.members.push_back(make_individual(problem, std::move(x), sigma0));
    }
    return pop;
}

}  // namespace r2rl
