#pragma once

#include <r2rl/core.hpp>

namespace r2rl {

/// Inverted generational distance: mean over reference points of the distance
/// to the nearest solution.
double igd(const std::vector<Vector>& solutions, const std::vector<Vector>& reference);

/// Spacing as sqrt(sum (D_i - D_m)^2) / (n * D_m), with D_i each solution's
/// nearest-neighbour distance and D_m their mean. Needs n >= 2 and D_m > 0.
double spacing(const std::vector<Vector>& solutions);

/// Schott's original spacing, sqrt(sum (D_i - D_m)^2 / (n - 1)). Cross-check only.
double schott_spacing(const std::vector<Vector>& solutions);

struct Summary {
    double mean = 0.0;
    double min = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};

Summary summarize(std::span<const double> values);

/// Median by linear interpolation (same convention as the quartiles).
double quantile(std::vector<double> values, double q);

struct FriedmanResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    /// Mean rank of each column; rank 1 = smallest score.
    Vector mean_ranks;
};

/// Friedman test over a runs x algorithms score table (mid-ranks for ties).
FriedmanResult friedman(const std::vector<Vector>& scores);

/// Objective vectors of the rank-1, Pareto non-dominated members of a ranked population.
std::vector<Vector> final_solution_set(const Population& ranked);

}  // namespace r2rl
