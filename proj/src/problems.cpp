#include <r2rl/problems.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace r2rl {

namespace {

constexpr double kPi = M_PI;

constexpr std::array<std::string_view, 10> kNames = {"UF1", "UF2", "UF3", "UF4", "UF5",
                                                     "UF6", "UF7", "UF8", "UF9", "UF10"};

// Accumulates a per-group term and counts group members. Group index is the
// 1-based variable index j mapped to {0, 1} (m = 2) or {0, 1, 2} (m = 3).
struct GroupSums {
    std::array<double, 3> sum{};
    std::array<double, 3> prod{1.0, 1.0, 1.0};
    std::array<int, 3> count{};

    double mean(int g) const { return count[g] > 0 ? sum[g] / count[g] : 0.0; }
};

// J1 = odd j, J2 = even j for j in [2, n].
int group2(int j) { return (j % 2 == 1) ? 0 : 1; }

// J1: (j - 1) % 3 == 0, J2: (j - 2) % 3 == 0, J3: j % 3 == 0 for j in [3, n].
int group3(int j) {
    if ((j - 1) % 3 == 0) return 0;
    if ((j - 2) % 3 == 0) return 1;
    return 2;
}

double sin_shift(double x1, int j, int n) { return std::sin(6.0 * kPi * x1 + j * kPi / n); }

Vector uf1(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - sin_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += y * y;
        ++g.count[k];
    }
    return {x[0] + 2.0 * g.mean(0), 1.0 - std::sqrt(x[0]) + 2.0 * g.mean(1)};
}

double uf2_shift(double x1, int j, int n) {
    const double amp = 0.3 * x1 * x1 * std::cos(24.0 * kPi * x1 + 4.0 * j * kPi / n) + 0.6 * x1;
    const double phase = 6.0 * kPi * x1 + j * kPi / n;
    return group2(j) == 0 ? amp * std::cos(phase) : amp * std::sin(phase);
}

Vector uf2(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - uf2_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += y * y;
        ++g.count[k];
    }
    return {x[0] + 2.0 * g.mean(0), 1.0 - std::sqrt(x[0]) + 2.0 * g.mean(1)};
}

double uf3_shift(double x1, int j, int n) { return std::pow(x1, 0.5 * (1.0 + 3.0 * (j - 2.0) / (n - 2.0))); }

Vector uf3(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - uf3_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += y * y;
        g.prod[k] *= std::cos(20.0 * y * kPi / std::sqrt(static_cast<double>(j)));
        ++g.count[k];
    }
    auto term = [&](int k) { return 2.0 / g.count[k] * (4.0 * g.sum[k] - 2.0 * g.prod[k] + 2.0); };
    return {x[0] + term(0), 1.0 - std::sqrt(x[0]) + term(1)};
}

Vector uf4(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = std::fabs(x[j - 1] - sin_shift(x[0], j, n));
        const int k = group2(j);
        g.sum[k] += y / (1.0 + std::exp(2.0 * y));
        ++g.count[k];
    }
    return {x[0] + 2.0 * g.mean(0), 1.0 - x[0] * x[0] + 2.0 * g.mean(1)};
}

Vector uf5(std::span<const double> x) {
    constexpr double kN = 10.0;
    constexpr double kEps = 0.1;
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - sin_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += 2.0 * y * y - std::cos(4.0 * kPi * y) + 1.0;
        ++g.count[k];
    }
    const double h = (0.5 / kN + kEps) * std::fabs(std::sin(2.0 * kN * kPi * x[0]));
    return {x[0] + h + 2.0 * g.mean(0), 1.0 - x[0] + h + 2.0 * g.mean(1)};
}

Vector uf6(std::span<const double> x) {
    constexpr double kN = 2.0;
    constexpr double kEps = 0.1;
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - sin_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += y * y;
        g.prod[k] *= std::cos(20.0 * y * kPi / std::sqrt(static_cast<double>(j)));
        ++g.count[k];
    }
    auto term = [&](int k) { return 2.0 / g.count[k] * (4.0 * g.sum[k] - 2.0 * g.prod[k] + 2.0); };
    const double h = std::max(0.0, 2.0 * (0.5 / kN + kEps) * std::sin(2.0 * kN * kPi * x[0]));
    return {x[0] + h + term(0), 1.0 - x[0] + h + term(1)};
}

Vector uf7(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 2; j <= n; ++j) {
        const double y = x[j - 1] - sin_shift(x[0], j, n);
        const int k = group2(j);
        g.sum[k] += y * y;
        ++g.count[k];
    }
    const double t = std::pow(x[0], 0.2);
    return {t + 2.0 * g.mean(0), 1.0 - t + 2.0 * g.mean(1)};
}

double three_obj_shift(std::span<const double> x, int j, int n) {
    return 2.0 * x[1] * std::sin(2.0 * kPi * x[0] + j * kPi / n);
}

GroupSums three_obj_sums(std::span<const double> x, bool rastrigin_like) {
    const int n = static_cast<int>(x.size());
    GroupSums g;
    for (int j = 3; j <= n; ++j) {
        const double y = x[j - 1] - three_obj_shift(x, j, n);
        const int k = group3(j);
        g.sum[k] += rastrigin_like ? 4.0 * y * y - std::cos(8.0 * kPi * y) + 1.0 : y * y;
        ++g.count[k];
    }
    return g;
}

Vector sphere_front_objectives(std::span<const double> x, const GroupSums& g) {
    const double c1 = std::cos(0.5 * kPi * x[0]);
    return {c1 * std::cos(0.5 * kPi * x[1]) + 2.0 * g.mean(0), c1 * std::sin(0.5 * kPi * x[1]) + 2.0 * g.mean(1),
            std::sin(0.5 * kPi * x[0]) + 2.0 * g.mean(2)};
}

Vector uf8(std::span<const double> x) { return sphere_front_objectives(x, three_obj_sums(x, false)); }

Vector uf9(std::span<const double> x) {
    constexpr double kEps = 0.1;
    const GroupSums g = three_obj_sums(x, false);
    const double t = 2.0 * x[0] - 1.0;
    const double h = std::max(0.0, (1.0 + kEps) * (1.0 - 4.0 * t * t));
    return {0.5 * (h + 2.0 * x[0]) * x[1] + 2.0 * g.mean(0), 0.5 * (h - 2.0 * x[0] + 2.0) * x[1] + 2.0 * g.mean(1),
            1.0 - x[1] + 2.0 * g.mean(2)};
}

Vector uf10(std::span<const double> x) { return sphere_front_objectives(x, three_obj_sums(x, true)); }

// All (i1, i2, i3) with i1 + i2 + i3 = h.
template <typename Fn>
void for_each_lattice3(int h, Fn&& fn) {
    for (int i1 = 0; i1 <= h; ++i1)
        for (int i2 = 0; i1 + i2 <= h; ++i2) fn(i1, i2, h - i1 - i2);
}

}  // namespace

std::string_view to_string(ProblemId id) { return kNames.at(static_cast<std::size_t>(id) - 1); }

std::optional<ProblemId> parse_problem(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return static_cast<ProblemId>(i + 1);
    return std::nullopt;
}

Problem::Problem(ProblemId id, int dim) : id_(id), n_obj_(id >= ProblemId::UF8 ? 3 : 2), dim_(dim) {
    if (dim < n_obj_ + 2) throw InvalidArgument(fmt::format("{} needs dim >= {}", to_string(id), n_obj_ + 2));
    bounds_.lower.assign(static_cast<std::size_t>(dim), 0.0);
    bounds_.upper.assign(static_cast<std::size_t>(dim), 1.0);
    switch (id) {
        case ProblemId::UF3:
            break;
        case ProblemId::UF4:
            std::fill(bounds_.lower.begin() + 1, bounds_.lower.end(), -2.0);
            std::fill(bounds_.upper.begin() + 1, bounds_.upper.end(), 2.0);
            break;
        case ProblemId::UF8:
        case ProblemId::UF9:
        case ProblemId::UF10:
            std::fill(bounds_.lower.begin() + 2, bounds_.lower.end(), -2.0);
            std::fill(bounds_.upper.begin() + 2, bounds_.upper.end(), 2.0);
            break;
        default:
            std::fill(bounds_.lower.begin() + 1, bounds_.lower.end(), -1.0);
            std::fill(bounds_.upper.begin() + 1, bounds_.upper.end(), 1.0);
            break;
    }
}

Vector Problem::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw InvalidArgument(fmt::format("{}: expected {} variables, got {}", name(), dim_, x.size()));
    switch (id_) {
        case ProblemId::UF1: return uf1(x);
        case ProblemId::UF2: return uf2(x);
        case ProblemId::UF3: return uf3(x);
        case ProblemId::UF4: return uf4(x);
        case ProblemId::UF5: return uf5(x);
        case ProblemId::UF6: return uf6(x);
        case ProblemId::UF7: return uf7(x);
        case ProblemId::UF8: return uf8(x);
        case ProblemId::UF9: return uf9(x);
        case ProblemId::UF10: return uf10(x);
    }
    throw InvalidArgument("unknown problem");
}

Vector Problem::pareto_set_point(double t, double u) const {
    Vector x(static_cast<std::size_t>(dim_));
    const int n = dim_;
    x[0] = t;
    if (n_obj_ == 3) {
        x[1] = u;
        for (int j = 3; j <= n; ++j) x[j - 1] = three_obj_shift(x, j, n);
        return x;
    }
    for (int j = 2; j <= n; ++j) {
        switch (id_) {
            case ProblemId::UF2: x[j - 1] = uf2_shift(t, j, n); break;
            case ProblemId::UF3: x[j - 1] = uf3_shift(t, j, n); break;
            default: x[j - 1] = sin_shift(t, j, n); break;
        }
    }
    return x;
}

std::vector<Vector> Problem::pareto_front_samples(int k) const {
    if (k < 2) throw InvalidArgument("pareto_front_samples: k must be >= 2");
    std::vector<Vector> front;
    auto along = [&](int count, int i) { return count == 1 ? 0.0 : static_cast<double>(i) / (count - 1); };

    switch (id_) {
        case ProblemId::UF1:
        case ProblemId::UF2:
        case ProblemId::UF3:
            for (int i = 0; i < k; ++i) {
                const double f1 = along(k, i);
                front.push_back({f1, 1.0 - std::sqrt(f1)});
            }
            break;
        case ProblemId::UF4:
            for (int i = 0; i < k; ++i) {
                const double f1 = along(k, i);
                front.push_back({f1, 1.0 - f1 * f1});
            }
            break;
        case ProblemId::UF5:
            for (int i = 0; i <= 20; ++i) {
                const double f1 = i / 20.0;
                front.push_back({f1, 1.0 - f1});
            }
            break;
        case ProblemId::UF6: {
            // Isolated point (0, 1) plus f1 in [0.25, 0.5] U [0.75, 1].
            front.push_back({0.0, 1.0});
            const int rest = k - 1;
            for (int i = 0; i < rest; ++i) {
                const double s = 0.5 * along(rest, i);
                const double f1 = s <= 0.25 ? 0.25 + s : 0.5 + s;
                front.push_back({f1, 1.0 - f1});
            }
            break;
        }
        case ProblemId::UF7:
            for (int i = 0; i < k; ++i) {
                const double f1 = along(k, i);
                front.push_back({f1, 1.0 - f1});
            }
            break;
        case ProblemId::UF8:
        case ProblemId::UF10: {
            int h = 1;
            while ((h + 1) * (h + 2) / 2 < k) ++h;
            for_each_lattice3(h, [&](int i1, int i2, int i3) {
                Vector w{static_cast<double>(i1), static_cast<double>(i2), static_cast<double>(i3)};
                const double norm = euclidean_norm(w);
                for (double& v : w) v /= norm;
                front.push_back(std::move(w));
            });
            break;
        }
        case ProblemId::UF9: {
            // Plane f1 + f2 + f3 = 1 with f1 restricted to the two outer quarters of [0, 1 - f3].
            auto admissible = [](int i1, int i3, int h) { return 4 * i1 <= h - i3 || 4 * i1 >= 3 * (h - i3); };
            int h = 1;
            for (;; ++h) {
                int count = 0;
                for_each_lattice3(h, [&](int i1, int, int i3) { count += admissible(i1, i3, h) ? 1 : 0; });
                if (count >= k) break;
            }
            for_each_lattice3(h, [&](int i1, int i2, int i3) {
                if (admissible(i1, i3, h))
                    front.push_back({static_cast<double>(i1) / h, static_cast<double>(i2) / h, static_cast<double>(i3) / h});
            });
            break;
        }
    }
    return front;
}

void write_front_csv(std::ostream& out, const std::vector<Vector>& front) {
    const std::size_t m = front.empty() ? 0 : front.front().size();
    for (std::size_t i = 0; i < m; ++i) out << (i ? "," : "") << "f" << (i + 1);
    out << '\n';
    for (const Vector& p : front) {
        for (std::size_t i = 0; i < p.size(); ++i) out << (i ? "," : "") << fmt::format("{:.17g}", p[i]);
        out << '\n';
    }
}

}  // namespace r2rl
