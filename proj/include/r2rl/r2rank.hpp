#pragma once

#include <r2rl/core.hpp>

namespace r2rl {

/// Weight vectors on the unit simplex; every component strictly positive.
struct WeightSet {
    std::vector<Vector> weights;

    std::size_t size() const { return weights.size(); }
    std::size_t n_obj() const { return weights.empty() ? 0 : weights.front().size(); }
};

inline constexpr double kZeroWeightShift = 1e-6;
inline constexpr double kUtopianOffset = 1e-4;
inline constexpr double kRangeGuard = 1e-12;

/// Simplex-lattice (Das-Dennis) weights. Zero components are raised to
/// kZeroWeightShift and the vector is renormalized to unit L1 norm.
WeightSet generate_weights(int m, int divisions);

/// Lattice divisions giving |W| close to n_pop: n_pop - 1 for m = 2, the
/// smallest lattice with at least n_pop points for m = 3.
int divisions_for_population(int m, int n_pop);

/// Achievement scalarizing function max_i |f_i - z_i| / w_i.
double asf(std::span<const double> f, std::span<const double> w, std::span<const double> z_star);

/// Mean over weights of the best ASF value any member of `points` attains.
double r2_indicator(const std::vector<Vector>& points, const WeightSet& weights, std::span<const double> z_star);

/// (f - z_star) / (z_nad - z_star) componentwise, with zero ranges guarded by kRangeGuard.
Vector normalize_objectives(std::span<const double> f, const ReferencePoints& refs);

/// Indices of members not Pareto-dominated by any other member.
std::vector<std::size_t> nondominated_indices(const std::vector<Individual>& members);

/// Refreshes the utopian point (monotone, offset by epsilon_ref) and the nadir
/// estimate (worst values over the non-dominated members, relaxed halfway toward
/// the worst value seen so far when fewer than m distinct non-dominated vectors remain).
ReferencePoints update_reference_points(const std::vector<Individual>& members, const ReferencePoints& previous,
                                        double epsilon_ref = kUtopianOffset);

/// R2 rank of each member, in input order (see rank_population).
std::vector<int> compute_r2_ranks(const std::vector<Individual>& members, const ReferencePoints& refs,
                                  const WeightSet& weights);

/// R2 ranking of a population.
///
/// Objectives are normalized with the population's reference points (derived
/// from the members when absent). For each weight, members are ordered by
/// (ASF against the origin, L2 norm); a member's position is the number of
/// members with a strictly smaller key. Its rank is one plus the smallest
/// position over all weights, and performance = rank + L2 norm. The returned
/// population is stably sorted by (rank, L2 norm).
Population rank_population(Population population, const WeightSet& weights);

}  // namespace r2rl
