#include <r2rl/metrics.hpp>
#include <r2rl/r2rank.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace r2rl {

namespace {

Vector nearest_neighbour_distances(const std::vector<Vector>& points) {
    Vector d(points.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j)
            if (i != j) d[i] = std::min(d[i], euclidean_distance(points[i], points[j]));
    return d;
}

void check_dims(const std::vector<Vector>& points, std::size_t m, std::string_view what) {
    for (const Vector& p : points)
        if (p.size() != m) throw InvalidArgument(fmt::format("{}: inconsistent objective dimension", what));
}

}  // namespace

double igd(const std::vector<Vector>& solutions, const std::vector<Vector>& reference) {
    if (solutions.empty() || reference.empty()) throw InvalidArgument("igd: empty solution or reference set");
    const std::size_t m = reference.front().size();
    check_dims(solutions, m, "igd");
    check_dims(reference, m, "igd");
    double total = 0.0;
    for (const Vector& r : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vector& p : solutions) best = std::min(best, euclidean_distance(p, r));
        total += best;
    }
    return total / static_cast<double>(reference.size());
}

double spacing(const std::vector<Vector>& solutions) {
    if (solutions.size() < 2) throw InvalidArgument("spacing: needs at least two solutions");
    check_dims(solutions, solutions.front().size(), "spacing");
    const Vector d = nearest_neighbour_distances(solutions);
    const double n = static_cast<double>(d.size());
    const double d_mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    if (!(d_mean > 0.0)) throw InvalidArgument("spacing: all solutions coincide");
    double ss = 0.0;
    for (double v : d) ss += (v - d_mean) * (v - d_mean);
    return std::sqrt(ss) / (n * d_mean);
}

double schott_spacing(const std::vector<Vector>& solutions) {
    if (solutions.size() < 2) throw InvalidArgument("schott_spacing: needs at least two solutions");
    const Vector d = nearest_neighbour_distances(solutions);
    const double n = static_cast<double>(d.size());
    const double d_mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : d) ss += (v - d_mean) * (v - d_mean);
    return std::sqrt(ss / (n - 1.0));
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("summarize: no values");
    Summary s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    s.min = *std::min_element(values.begin(), values.end());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile: no values");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

FriedmanResult friedman(const std::vector<Vector>& scores) {
    const std::size_t runs = scores.size();
    if (runs < 2) throw InvalidArgument("friedman: needs at least two rows");
    const std::size_t algos = scores.front().size();
    if (algos < 2) throw InvalidArgument("friedman: needs at least two columns");
    for (const Vector& row : scores)
        if (row.size() != algos) throw InvalidArgument("friedman: ragged score table");

    Vector rank_sums(algos, 0.0);
    std::vector<std::size_t> order(algos);
    for (const Vector& row : scores) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        for (std::size_t i = 0; i < algos;) {
            std::size_t j = i;
            while (j + 1 < algos && row[order[j + 1]] == row[order[i]]) ++j;
            const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) rank_sums[order[k]] += mid_rank;
            i = j + 1;
        }
    }

    const double n = static_cast<double>(runs);
    const double k = static_cast<double>(algos);
    // 12 / (n k (k+1)) * sum_j (R_j - n (k+1) / 2)^2, the centred form of the rank-sum statistic.
    const double expected = 0.5 * n * (k + 1.0);
    double sum_sq = 0.0;
    for (double r : rank_sums) sum_sq += (r - expected) * (r - expected);

    FriedmanResult out;
    out.statistic = 12.0 / (n * k * (k + 1.0)) * sum_sq;
    out.degrees_of_freedom = static_cast<int>(algos) - 1;
    out.p_value = boost::math::gamma_q(0.5 * out.degrees_of_freedom, 0.5 * std::max(out.statistic, 0.0));
    out.mean_ranks.resize(algos);
    for (std::size_t j = 0; j < algos; ++j) out.mean_ranks[j] = rank_sums[j] / n;
    return out;
}

std::vector<Vector> final_solution_set(const Population& ranked) {
    std::vector<Individual> best;
    for (const Individual& ind : ranked.members)
        if (ind.r2_rank == 1) best.push_back(ind);
    if (best.empty()) throw InvalidArgument("final_solution_set: population has no rank-1 member");
    std::vector<Vector> out;
    for (std::size_t idx : nondominated_indices(best)) out.push_back(best[idx].f);
    return out;
}

}  // namespace r2rl
