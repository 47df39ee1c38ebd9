#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace r2rl {

using Vector = std::vector<double>;

/// Thrown for contract violations on inputs (wrong sizes, empty sets, bad config).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces a non-finite value.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown for file and format problems.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Bounds {
    Vector lower;
    Vector upper;

    std::size_t size() const { return lower.size(); }
};

struct Individual {
    Vector x;
    Vector f;
    int r2_rank = 0;
    double l2_norm = 0.0;
    double performance = 0.0;
    /// ES strategy parameter, carried along so self-adaptation survives other operators.
    double sigma = 0.0;
};

/// Utopian and nadir estimates plus the componentwise worst value seen so far.
struct ReferencePoints {
    Vector z_star;
    Vector z_nad;
    Vector z_worst;

    bool empty() const { return z_star.empty(); }
};

struct Population {
    std::vector<Individual> members;
    int generation = 0;
    ReferencePoints refs;

    std::size_t size() const { return members.size(); }
};

struct RunConfig {
    int n_pop = 100;
    int g_max = 100;
    int n_game = 2000;
    double gamma = 0.9;
    int replay_size = 100000;
    int batch_size = 64;
    int hidden_nodes = 100;
    int hidden_layers = 2;
    double eps_initial = 0.9;
    double eps_final = 1e-3;
    int power_p = 3;
    int target_sync = 1000;
    double reward_c_initial = 1.0;
    double reward_c_final = 5.0;
    double learning_rate = 1e-3;
    /// +1 rewards a decreasing quartile mean (minimization), -1 the printed increasing form.
    int reward_direction = 1;
    std::uint64_t seed = 1;

    static constexpr int n_action = 5;
    static constexpr int n_states = 20;

    void validate() const;
};

double euclidean_norm(std::span<const double> v);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// True when a is no worse than b everywhere and strictly better somewhere (minimization).
bool dominates(std::span<const double> a, std::span<const double> b);

// --- random streams ---------------------------------------------------------

/// Purpose tags for derived streams. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    init = 1,
    operators = 2,
    policy = 3,
    replay = 4,
    network = 5,
    run = 6,
    validation = 7,
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream (tag, index) under a root seed: mix(mix(root ^ mix(tag)) + index).
std::uint64_t derive_seed(std::uint64_t root, Stream tag, std::uint64_t index = 0);

Rng make_rng(std::uint64_t root, Stream tag, std::uint64_t index = 0);

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
std::size_t uniform_index(Rng& rng, std::size_t n);

// --- operations -------------------------------------------------------------

class Problem;

Vector clip_to_bounds(std::span<const double> x, const Bounds& bounds);

/// Uniform sample inside the problem box, evaluated, generation 0, ES step size set to sigma0.
Population random_population(const Problem& problem, int n_pop, Rng& rng, double sigma0 = 0.1);

Individual make_individual(const Problem& problem, Vector x, double sigma = 0.0);

}  // namespace r2rl
