#include <r2rl/operators.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include <fmt/format.h>

namespace r2rl {

namespace {

constexpr std::array<std::string_view, kOperatorCount> kOperatorNames = {"EO", "WOA", "TLBO", "ES", "GA"};

Individual make_child(const Problem& problem, std::span<const double> x, double sigma) {
    return make_individual(problem, clip_to_bounds(x, problem.bounds()), sigma);
}

Vector population_mean(const std::vector<Individual>& members) {
    Vector mean(members.front().x.size(), 0.0);
    for (const Individual& ind : members)
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += ind.x[j];
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

// --- GA ---------------------------------------------------------------------

std::size_t binary_tournament(const std::vector<Individual>& members, Rng& rng) {
    const std::size_t a = uniform_index(rng, members.size());
    const std::size_t b = uniform_index(rng, members.size());
    return members[b].performance < members[a].performance ? b : a;
}

void sbx_crossover(Vector& c1, Vector& c2, const Bounds& bounds, double eta, Rng& rng) {
    constexpr double kEps = 1e-14;
    for (std::size_t j = 0; j < c1.size(); ++j) {
        if (uniform01(rng) > 0.5) continue;
        if (std::fabs(c1[j] - c2[j]) <= kEps) continue;
        const double y1 = std::min(c1[j], c2[j]);
        const double y2 = std::max(c1[j], c2[j]);
        const double lo = bounds.lower[j];
        const double hi = bounds.upper[j];
        const double u = uniform01(rng);

        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };
        double lower_child = 0.5 * ((y1 + y2) - spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1)) * (y2 - y1));
        double upper_child = 0.5 * ((y1 + y2) + spread(1.0 + 2.0 * (hi - y2) / (y2 - y1)) * (y2 - y1));
        lower_child = std::clamp(lower_child, lo, hi);
        upper_child = std::clamp(upper_child, lo, hi);
        if (uniform01(rng) <= 0.5) std::swap(lower_child, upper_child);
        c1[j] = lower_child;
        c2[j] = upper_child;
    }
}

void polynomial_mutation(Vector& x, const Bounds& bounds, double prob, double eta, Rng& rng) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (uniform01(rng) >= prob) continue;
        const double lo = bounds.lower[j];
        const double hi = bounds.upper[j];
        const double range = hi - lo;
        if (range <= 0.0) continue;
        const double d1 = (x[j] - lo) / range;
        const double d2 = (hi - x[j]) / range;
        const double u = uniform01(rng);
        const double power = 1.0 / (eta + 1.0);
        double dq = 0.0;
        if (u <= 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
            dq = std::pow(val, power) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            dq = 1.0 - std::pow(val, power);
        }
        x[j] = std::clamp(x[j] + dq * range, lo, hi);
    }
}

std::vector<Individual> ga_offspring(const Population& pop, const StepContext& ctx, Rng& rng) {
    const GaParams& p = ctx.params.ga;
    const Bounds& bounds = ctx.problem.bounds();
    const double pm = p.mutation_prob < 0.0 ? 1.0 / ctx.problem.dim() : p.mutation_prob;
    const std::size_t n = pop.size();
    std::vector<Individual> out;
    out.reserve(n);
    while (out.size() < n) {
        const Individual& pa = pop.members[binary_tournament(pop.members, rng)];
        const Individual& pb = pop.members[binary_tournament(pop.members, rng)];
        Vector c1 = pa.x;
        Vector c2 = pb.x;
        if (uniform01(rng) < p.crossover_prob) sbx_crossover(c1, c2, bounds, p.sbx_eta, rng);
        polynomial_mutation(c1, bounds, pm, p.mutation_eta, rng);
        polynomial_mutation(c2, bounds, pm, p.mutation_eta, rng);
        out.push_back(make_child(ctx.problem, c1, pa.sigma));
        if (out.size() < n) out.push_back(make_child(ctx.problem, c2, pb.sigma));
    }
    return out;
}

// --- ES ---------------------------------------------------------------------

std::vector<Individual> es_offspring(const Population& pop, const StepContext& ctx, Rng& rng) {
    const EsParams& p = ctx.params.es;
    const Bounds& bounds = ctx.problem.bounds();
    const std::size_t n = pop.size();
    const auto mu = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(p.parent_fraction * n)), 1, n);
    const double tau = p.learning_rate < 0.0 ? 1.0 / std::sqrt(2.0 * ctx.problem.dim()) : p.learning_rate;

    // Global intermediate recombination: every offspring starts from the parent centroid.
    std::vector<Vector> parents;
    double sigma_mean = 0.0;
    for (std::size_t k = 0; k < mu; ++k) {
        parents.push_back(pop.members[k].x);
        sigma_mean += pop.members[k].sigma / static_cast<double>(mu);
    }
    const Vector centroid = es_recombine(parents);

    std::vector<Individual> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Vector x = centroid;
        const double sigma = sigma_mean * std::exp(tau * standard_normal(rng));
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] += sigma * (bounds.upper[j] - bounds.lower[j]) * standard_normal(rng);
        out.push_back(make_child(ctx.problem, x, sigma));
    }
    return out;
}

// --- TLBO -------------------------------------------------------------------

std::vector<Individual> tlbo_offspring(const Population& pop, const StepContext& ctx, Rng& rng) {
    const std::size_t n = pop.size();
    const std::size_t dim = static_cast<std::size_t>(ctx.problem.dim());
    const Vector mean = population_mean(pop.members);
    const Individual& teacher = pop.members.front();

    std::vector<Individual> candidates;
    candidates.reserve(n);
    Vector r(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double tf = 1.0 + static_cast<double>(uniform_index(rng, 2));
        for (double& v : r) v = uniform01(rng);
        const Individual& learner = pop.members[i];
        candidates.push_back(
            make_child(ctx.problem, tlbo_teacher_update(learner.x, teacher.x, mean, r, tf), learner.sigma));
    }

    // Greedy acceptance: rank learners and candidates together, keep whichever scores lower.
    std::vector<Individual> joint = pop.members;
    joint.insert(joint.end(), candidates.begin(), candidates.end());
    const ReferencePoints refs = update_reference_points(joint, pop.refs);
    const std::vector<int> ranks = compute_r2_ranks(joint, refs, ctx.weights);
    std::vector<double> perf(joint.size());
    for (std::size_t i = 0; i < joint.size(); ++i) perf[i] = ranks[i] + euclidean_norm(joint[i].f);

    std::vector<Individual> learners;
    std::vector<Individual> accepted;
    learners.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (perf[n + i] < perf[i]) {
            learners.push_back(candidates[i]);
            learners.back().performance = perf[n + i];
            accepted.push_back(candidates[i]);
        } else {
            learners.push_back(pop.members[i]);
            learners.back().performance = perf[i];
        }
    }

    std::vector<Individual> out = std::move(accepted);
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = uniform_index(rng, n - 1);
        if (j >= i) ++j;
        const Individual& xi = learners[i];
        const Individual& xj = learners[j];
        Vector x = xi.x;
        const bool i_better = xi.performance < xj.performance;
        for (std::size_t d = 0; d < dim; ++d) {
            const double step = i_better ? xi.x[d] - xj.x[d] : xj.x[d] - xi.x[d];
            x[d] += uniform01(rng) * step;
        }
        out.push_back(make_child(ctx.problem, x, xi.sigma));
    }
    return out;
}

// --- WOA --------------------------------------------------------------------

std::vector<Individual> woa_offspring(const Population& pop, const StepContext& ctx, Rng& rng) {
    const WoaParams& p = ctx.params.woa;
    const std::size_t n = pop.size();
    const double a = p.a_override ? *p.a_override : 2.0 - 2.0 * static_cast<double>(pop.generation) / ctx.g_max;
    const Vector& best = pop.members.front().x;

    std::vector<Individual> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector& x = pop.members[i].x;
        const double coef_a = 2.0 * a * uniform01(rng) - a;
        const double coef_c = 2.0 * uniform01(rng);
        const double branch = uniform01(rng);
        const double l = uniform(rng, -1.0, 1.0);
        Vector next(x.size());
        if (branch < p.encircle_prob) {
            const Vector& target = std::fabs(coef_a) < 1.0 ? best : pop.members[uniform_index(rng, n)].x;
            for (std::size_t j = 0; j < x.size(); ++j)
                next[j] = target[j] - coef_a * std::fabs(coef_c * target[j] - x[j]);
        } else {
            const double spiral = std::exp(p.spiral_b * l) * std::cos(2.0 * M_PI * l);
            for (std::size_t j = 0; j < x.size(); ++j) next[j] = std::fabs(best[j] - x[j]) * spiral + best[j];
        }
        out.push_back(make_child(ctx.problem, next, pop.members[i].sigma));
    }
    return out;
}

// --- EO ---------------------------------------------------------------------

std::vector<Individual> eo_offspring(const Population& pop, const StepContext& ctx, Rng& rng) {
    const EoParams& p = ctx.params.eo;
    const std::size_t n = pop.size();
    const std::size_t dim = static_cast<std::size_t>(ctx.problem.dim());

    std::vector<Vector> pool;
    const std::size_t best_count = std::min<std::size_t>(static_cast<std::size_t>(p.pool_best), n);
    Vector average(dim, 0.0);
    for (std::size_t k = 0; k < best_count; ++k) {
        pool.push_back(pop.members[k].x);
        for (std::size_t j = 0; j < dim; ++j) average[j] += pop.members[k].x[j] / static_cast<double>(best_count);
    }
    pool.push_back(std::move(average));

    const double progress = static_cast<double>(pop.generation) / ctx.g_max;
    const double t = std::pow(1.0 - progress, p.a2 * progress);

    std::vector<Individual> out;
    out.reserve(n);
    Vector lambda(dim), f(dim), g(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector& c = pop.members[i].x;
        const Vector& c_eq = pool[uniform_index(rng, pool.size())];
        for (std::size_t j = 0; j < dim; ++j) {
            lambda[j] = 1.0 - uniform01(rng);  // (0, 1]
            const double r = uniform01(rng);
            const double sign = r > 0.5 ? 1.0 : (r < 0.5 ? -1.0 : 0.0);
            f[j] = p.a1 * sign * (std::exp(-lambda[j] * t) - 1.0);
        }
        const double r1 = uniform01(rng);
        const double r2 = uniform01(rng);
        const double gcp = r2 >= p.generation_prob ? 0.5 * r1 : 0.0;
        for (std::size_t j = 0; j < dim; ++j) g[j] = gcp * (c_eq[j] - lambda[j] * c[j]) * f[j];
        out.push_back(make_child(ctx.problem, eo_update(c, c_eq, f, g, lambda), pop.members[i].sigma));
    }
    return out;
}

std::uint64_t hash_vector(const Vector& x) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (double v : x) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h = mix64(h ^ bits);
    }
    return h;
}

}  // namespace

std::string_view to_string(OperatorId id) { return kOperatorNames.at(static_cast<std::size_t>(id)); }

std::optional<OperatorId> parse_operator(std::string_view name) {
    for (std::size_t i = 0; i < kOperatorNames.size(); ++i)
        if (kOperatorNames[i] == name) return static_cast<OperatorId>(i);
    return std::nullopt;
}

OperatorId operator_from_index(int index) {
    if (index < 0 || index >= kOperatorCount) throw InvalidArgument(fmt::format("unknown operator index {}", index));
    return static_cast<OperatorId>(index);
}

void OperatorParams::validate() const {
    auto prob = [](double v, std::string_view key) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(fmt::format("{} must lie in [0,1], got {}", key, v));
    };
    prob(ga.crossover_prob, "ga.crossover_prob");
    if (ga.mutation_prob >= 0.0) prob(ga.mutation_prob, "ga.mutation_prob");
    if (!(ga.sbx_eta > 0.0) || !(ga.mutation_eta > 0.0)) throw InvalidArgument("GA distribution indices must be > 0");
    if (!(es.parent_fraction > 0.0 && es.parent_fraction <= 1.0))
        throw InvalidArgument("es.parent_fraction must lie in (0,1]");
    if (!(es.initial_sigma >= 0.0)) throw InvalidArgument("es.initial_sigma must be >= 0");
    prob(woa.encircle_prob, "woa.encircle_prob");
    prob(eo.generation_prob, "eo.generation_prob");
    if (eo.pool_best != 4) throw InvalidArgument("eo.pool_best is fixed at 4");
}

Vector tlbo_teacher_update(std::span<const double> x, std::span<const double> teacher, std::span<const double> mean,
                           std::span<const double> r, double tf) {
    Vector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + r[j] * (teacher[j] - tf * mean[j]);
    return out;
}

Vector eo_update(std::span<const double> c, std::span<const double> c_eq, std::span<const double> f,
                 std::span<const double> g, std::span<const double> lambda) {
    Vector out(c.size());
    for (std::size_t j = 0; j < c.size(); ++j)
        out[j] = c_eq[j] + (c[j] - c_eq[j]) * f[j] + g[j] / lambda[j] * (1.0 - f[j]);
    return out;
}

Vector es_recombine(const std::vector<Vector>& parents) {
    if (parents.empty()) throw InvalidArgument("es_recombine: no parents");
    Vector out(parents.front().size(), 0.0);
    for (const Vector& p : parents)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += p[j];
    for (double& v : out) v /= static_cast<double>(parents.size());
    return out;
}

std::vector<Individual> make_offspring(OperatorId op, const Population& ranked, const StepContext& ctx, Rng& rng) {
    if (ranked.members.empty()) throw InvalidArgument("make_offspring: empty population");
    switch (op) {
        case OperatorId::EO: return eo_offspring(ranked, ctx, rng);
        case OperatorId::WOA: return woa_offspring(ranked, ctx, rng);
        case OperatorId::TLBO: return tlbo_offspring(ranked, ctx, rng);
        case OperatorId::ES: return es_offspring(ranked, ctx, rng);
        case OperatorId::GA: return ga_offspring(ranked, ctx, rng);
    }
    throw InvalidArgument(fmt::format("unknown operator id {}", static_cast<int>(op)));
}

Population select_survivors(Population parents, std::vector<Individual> offspring, const WeightSet& weights,
                            std::size_t n_pop) {
    Population merged;
    merged.generation = parents.generation;
    merged.members = std::move(parents.members);
    merged.members.insert(merged.members.end(), std::make_move_iterator(offspring.begin()),
                          std::make_move_iterator(offspring.end()));
    merged.refs = update_reference_points(merged.members, parents.refs);
    merged = rank_population(std::move(merged), weights);

    Population survivors;
    survivors.generation = merged.generation;
    survivors.refs = merged.refs;
    std::vector<Individual> clones;
    std::unordered_multimap<std::uint64_t, std::size_t> seen;
    for (Individual& ind : merged.members) {
        if (survivors.size() >= n_pop) break;
        const std::uint64_t h = hash_vector(ind.x);
        const auto [lo, hi] = seen.equal_range(h);
        const bool duplicate =
            std::any_of(lo, hi, [&](const auto& entry) { return survivors.members[entry.second].x == ind.x; });
        if (duplicate) {
            clones.push_back(std::move(ind));
            continue;
        }
        seen.emplace(h, survivors.size());
        survivors.members.push_back(std::move(ind));
    }
    for (std::size_t k = 0; survivors.size() < n_pop && k < clones.size(); ++k)
        survivors.members.push_back(std::move(clones[k]));
    return rank_population(std::move(survivors), weights);
}

Population step(OperatorId op, Population ranked, const StepContext& ctx, Rng& rng) {
    const std::size_t n_pop = ranked.size();
    std::vector<Individual> offspring = make_offspring(op, ranked, ctx, rng);
    Population next = select_survivors(std::move(ranked), std::move(offspring), ctx.weights, n_pop);
    ++next.generation;
    return next;
}

OperatorId random_select(Rng& rng) { return static_cast<OperatorId>(uniform_index(rng, kOperatorCount)); }

}  // namespace r2rl
