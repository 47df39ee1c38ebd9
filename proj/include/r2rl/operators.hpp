#pragma once

#include <r2rl/core.hpp>
#include <r2rl/problems.hpp>
#include <r2rl/r2rank.hpp>

#include <array>
#include <optional>

namespace r2rl {

/// Action indices of the agent. The integer codes are stable.
enum class OperatorId : int { EO = 0, WOA = 1, TLBO = 2, ES = 3, GA = 4 };

inline constexpr int kOperatorCount = 5;
inline constexpr std::array<OperatorId, kOperatorCount> kAllOperators = {OperatorId::EO, OperatorId::WOA,
                                                                         OperatorId::TLBO, OperatorId::ES,
                                                                         OperatorId::GA};

std::string_view to_string(OperatorId id);
std::optional<OperatorId> parse_operator(std::string_view name);
OperatorId operator_from_index(int index);

struct GaParams {
    double crossover_prob = 0.9;
    double sbx_eta = 20.0;
    /// Per-variable mutation probability; negative means 1/n.
    double mutation_prob = -1.0;
    double mutation_eta = 20.0;
};

struct EsParams {
    double parent_fraction = 0.5;
    /// Step size assigned at initialization, relative to each variable's range. Gives the
    /// same mean absolute step as polynomial mutation with eta = 20.
    double initial_sigma = 0.057;
    /// Log-normal learning rate; negative means 1/sqrt(2n).
    double learning_rate = -1.0;
};

struct WoaParams {
    double spiral_b = 1.0;
    /// Probability of the encircling/search branch (otherwise spiral).
    double encircle_prob = 0.5;
    /// Fixes the coefficient `a` instead of the linear 2 -> 0 schedule.
    std::optional<double> a_override;
};

struct EoParams {
    double a1 = 2.0;
    double a2 = 1.0;
    double generation_prob = 0.5;
    /// Best candidates in the equilibrium pool; their average is added as one more entry.
    int pool_best = 4;
};

struct OperatorParams {
    GaParams ga;
    EsParams es;
    WoaParams woa;
    EoParams eo;

    void validate() const;
};

/// Everything an operator step needs besides the population and the random stream.
struct StepContext {
    const Problem& problem;
    const WeightSet& weights;
    const OperatorParams& params;
    int g_max;
};

/// Offspring produced by one operator from a ranked population (evaluated, clipped).
std::vector<Individual> make_offspring(OperatorId op, const Population& ranked, const StepContext& ctx, Rng& rng);

/// (mu + lambda) truncation: merge, refresh reference points, R2-rank, keep the best
/// n_pop preferring distinct decision vectors, then rank the survivors among themselves.
Population select_survivors(Population parents, std::vector<Individual> offspring, const WeightSet& weights,
                            std::size_t n_pop);

/// One generation of the chosen operator. Output has the input's size, is ranked, and
/// its generation counter is incremented.
Population step(OperatorId op, Population ranked, const StepContext& ctx, Rng& rng);

OperatorId random_select(Rng& rng);

// Update rules shared by the step functions and exposed for direct checks.

/// x + r * (teacher - tf * mean), per component.
Vector tlbo_teacher_update(std::span<const double> x, std::span<const double> teacher, std::span<const double> mean,
                           std::span<const double> r, double tf);

/// Equilibrium-optimizer concentration update with unit generation volume.
Vector eo_update(std::span<const double> c, std::span<const double> c_eq, std::span<const double> f,
                 std::span<const double> g, std::span<const double> lambda);

/// Intermediate recombination: componentwise mean of the parents.
Vector es_recombine(const std::vector<Vector>& parents);

}  // namespace r2rl
