#include <r2rl/r2rank.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace r2rl {

WeightSet generate_weights(int m, int divisions) {
    if (m != 2 && m != 3) throw InvalidArgument(fmt::format("generate_weights: m must be 2 or 3, got {}", m));
    if (divisions < 1) throw InvalidArgument("generate_weights: divisions must be >= 1");

    WeightSet out;
    auto push = [&](Vector w) {
        double total = 0.0;
        for (double& v : w) {
            if (v == 0.0) v = kZeroWeightShift;
            total += v;
        }
        for (double& v : w) v /= total;
        out.weights.push_back(std::move(w));
    };
    const double h = divisions;
    if (m == 2) {
        for (int i = 0; i <= divisions; ++i) push({i / h, (divisions - i) / h});
    } else {
        for (int i = 0; i <= divisions; ++i)
            for (int j = 0; i + j <= divisions; ++j) push({i / h, j / h, (divisions - i - j) / h});
    }
    return out;
}

int divisions_for_population(int m, int n_pop) {
    if (n_pop < 2) throw InvalidArgument("divisions_for_population: n_pop must be >= 2");
    if (m == 2) return n_pop - 1;
    int h = 1;
    while ((h + 1) * (h + 2) / 2 < n_pop) ++h;
    return h;
}

double asf(std::span<const double> f, std::span<const double> w, std::span<const double> z_star) {
    if (f.size() != w.size() || f.size() != z_star.size()) throw InvalidArgument("asf: length mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(w[i] > 0.0)) throw InvalidArgument(fmt::format("asf: weight component {} is not positive", i));
        best = std::max(best, std::fabs(f[i] - z_star[i]) / w[i]);
    }
    return best;
}

double r2_indicator(const std::vector<Vector>& points, const WeightSet& weights, std::span<const double> z_star) {
    if (points.empty()) throw InvalidArgument("r2_indicator: empty point set");
    if (weights.size() == 0) throw InvalidArgument("r2_indicator: empty weight set");
    double total = 0.0;
    for (const Vector& w : weights.weights) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vector& p : points) best = std::min(best, asf(p, w, z_star));
        total += best;
    }
    return total / static_cast<double>(weights.size());
}

Vector normalize_objectives(std::span<const double> f, const ReferencePoints& refs) {
    if (f.size() != refs.z_star.size()) throw InvalidArgument("normalize_objectives: length mismatch");
    Vector out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = (f[i] - refs.z_star[i]) / std::max(refs.z_nad[i] - refs.z_star[i], kRangeGuard);
    return out;
}

std::vector<std::size_t> nondominated_indices(const std::vector<Individual>& members) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < members.size() && !dominated; ++j)
            dominated = j != i && dominates(members[j].f, members[i].f);
        if (!dominated) out.push_back(i);
    }
    return out;
}

ReferencePoints update_reference_points(const std::vector<Individual>& members, const ReferencePoints& previous,
                                        double epsilon_ref) {
    if (members.empty()) return previous;
    const std::size_t m = members.front().f.size();

    ReferencePoints refs;
    refs.z_star.assign(m, std::numeric_limits<double>::infinity());
    refs.z_worst.assign(m, -std::numeric_limits<double>::infinity());
    if (!previous.empty()) {
        refs.z_star = previous.z_star;
        refs.z_worst = previous.z_worst;
    }
    for (const Individual& ind : members)
        for (std::size_t i = 0; i < m; ++i) {
            refs.z_star[i] = std::min(refs.z_star[i], ind.f[i] - epsilon_ref);
            refs.z_worst[i] = std::max(refs.z_worst[i], ind.f[i]);
        }

    const std::vector<std::size_t> front = nondominated_indices(members);
    Vector nadir(m, -std::numeric_limits<double>::infinity());
    std::vector<const Vector*> distinct;
    for (std::size_t idx : front) {
        const Vector& f = members[idx].f;
        for (std::size_t i = 0; i < m; ++i) nadir[i] = std::max(nadir[i], f[i]);
        if (std::none_of(distinct.begin(), distinct.end(), [&](const Vector* d) { return *d == f; }))
            distinct.push_back(&f);
    }
    if (distinct.size() < m)
        for (std::size_t i = 0; i < m; ++i) nadir[i] = 0.5 * (nadir[i] + refs.z_worst[i]);
    refs.z_nad = std::move(nadir);
    return refs;
}

std::vector<int> compute_r2_ranks(const std::vector<Individual>& members, const ReferencePoints& refs,
                                  const WeightSet& weights) {
    if (members.empty()) throw InvalidArgument("rank_population: empty population");
    if (weights.size() == 0) throw InvalidArgument("rank_population: empty weight set");

    const std::size_t n = members.size();
    std::vector<Vector> normalized(n);
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = euclidean_norm(members[i].f);
        normalized[i] = normalize_objectives(members[i].f, refs);
    }

    std::vector<std::size_t> best_position(n, n);
    std::vector<double> scalar(n);
    std::vector<std::size_t> order(n);
    const Vector origin(weights.n_obj(), 0.0);
    for (const Vector& w : weights.weights) {
        for (std::size_t i = 0; i < n; ++i) scalar[i] = asf(normalized[i], w, origin);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto less = [&](std::size_t a, std::size_t b) {
            if (scalar[a] != scalar[b]) return scalar[a] < scalar[b];
            return norms[a] < norms[b];
        };
        std::stable_sort(order.begin(), order.end(), less);
        // Tied keys share the position of the first member of their group.
        std::size_t group_start = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0 && less(order[k - 1], order[k])) group_start = k;
            best_position[order[k]] = std::min(best_position[order[k]], group_start);
        }
    }

    std::vector<int> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = static_cast<int>(best_position[i]) + 1;
    return ranks;
}

Population rank_population(Population population, const WeightSet& weights) {
    auto& members = population.members;
    if (members.empty()) throw InvalidArgument("rank_population: empty population");
    if (population.refs.empty()) population.refs = update_reference_points(members, {});

    const std::vector<int> ranks = compute_r2_ranks(members, population.refs, weights);
    for (std::size_t i = 0; i < members.size(); ++i) {
        members[i].l2_norm = euclidean_norm(members[i].f);
        members[i].r2_rank = ranks[i];
        members[i].performance = members[i].r2_rank + members[i].l2_norm;
    }
    std::stable_sort(members.begin(), members.end(), [](const Individual& a, const Individual& b) {
        if (a.r2_rank != b.r2_rank) return a.r2_rank < b.r2_rank;
        return a.l2_norm < b.l2_norm;
    });
    return population;
}

}  // namespace r2rl
