#pragma once

#include <r2rl/core.hpp>

#include <iosfwd>
#include <optional>
#include <string_view>

namespace r2rl {

/// CEC 2009 unconstrained test problems.
enum class ProblemId { UF1 = 1, UF2, UF3, UF4, UF5, UF6, UF7, UF8, UF9, UF10 };

std::string_view to_string(ProblemId id);
std::optional<ProblemId> parse_problem(std::string_view name);

class Problem {
  public:
    explicit Problem(ProblemId id, int dim = 30);

    ProblemId id() const { return id_; }
    std::string_view name() const { return to_string(id_); }
    int n_obj() const { return n_obj_; }
    int dim() const { return dim_; }
    const Bounds& bounds() const { return bounds_; }

    /// Objective values at x. Throws InvalidArgument on a dimension mismatch.
    Vector evaluate(std::span<const double> x) const;

    /// Points on the analytic Pareto front.
    ///
    /// Two-objective continuous fronts are sampled uniformly in f1; UF5 has a
    /// discrete front of 21 points which is returned whole regardless of k.
    /// Three-objective fronts use the smallest simplex lattice with at least k
    /// admissible points, projected onto the front surface.
    std::vector<Vector> pareto_front_samples(int k) const;

    /// Default reference-set size for IGD: 1000 (m = 2) or 10000 (m = 3).
    int default_front_size() const { return n_obj_ == 2 ? 1000 : 10000; }

    /// A point of the Pareto set whose leading parameter(s) are `t` (and `u` for m = 3).
    /// Used to build optimal decision vectors for fidelity checks.
    Vector pareto_set_point(double t, double u = 0.0) const;

  private:
    ProblemId id_;
    int n_obj_;
    int dim_;
    Bounds bounds_;
};

void write_front_csv(std::ostream& out, const std::vector<Vector>& front);

}  // namespace r2rl
