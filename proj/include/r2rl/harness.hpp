#pragma once

#include <r2rl/agent.hpp>
#include <r2rl/core.hpp>
#include <r2rl/metrics.hpp>
#include <r2rl/operators.hpp>
#include <r2rl/problems.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace r2rl {

// --- configuration -----------------------------------------------------------

struct HarnessConfig {
    RunConfig run;
    OperatorParams params;
    std::vector<ProblemId> problems{ProblemId::UF1};
    std::string algorithm = "R2-RLMOEA";
    std::string out_dir = "out";
    /// Checkpoint for evaluate; empty means <out_dir>/<problem>/best.bin.
    std::string checkpoint;
    /// Where compare looks for <problem>/best.bin; empty means out_dir.
    std::string checkpoint_dir;
    int runs = 30;
    int validation_runs = 5;

    void validate() const;
};

/// Sets one key. RunConfig fields use their own names, operator parameters are
/// prefixed (ga.sbx_eta, es.initial_sigma, woa.a_override, eo.pool_best, ...).
/// `problem` takes a comma-separated list. Throws InvalidArgument on unknown keys or bad values.
void apply_setting(HarnessConfig& cfg, std::string_view key, std::string_view value);

/// key=value lines; '#' starts a comment; blank lines are skipped.
HarnessConfig parse_config(std::istream& in, const std::string& source, HarnessConfig base = {});
HarnessConfig load_config(const std::string& path, HarnessConfig base = {});

/// Every effective setting as sorted key=value lines.
std::string canonical_config(const HarnessConfig& cfg);
/// FNV-1a 64 over canonical_config without the path keys, as 16 hex digits.
std::string config_hash(const HarnessConfig& cfg);

// --- algorithms and single runs ----------------------------------------------

inline constexpr std::string_view kAgentAlgorithm = "R2-RLMOEA";
inline constexpr std::string_view kRandomAlgorithm = "RandomOp";

/// R2-RLMOEA, R2-EO, R2-WOA, R2-TLBO, R2-ES, R2-GA, RandomOp.
const std::vector<std::string>& algorithm_names();
/// The fixed-operator and random baselines (everything but the agent).
std::vector<std::string> baseline_names();
/// The operator a fixed-operator algorithm name stands for.
std::optional<OperatorId> fixed_operator_of(std::string_view algorithm);
bool is_known_algorithm(std::string_view algorithm);

/// Seed of evaluation run `run` under a root seed.
std::uint64_t run_seed(std::uint64_t root, int run);

struct RunRecord {
    std::string problem;
    std::string algorithm;
    int run = 0;
    std::uint64_t seed = 0;
    double igd = 0.0;
    double sp = 0.0;
    std::vector<OperatorId> ops;
};

/// Spacing of a final set, 0 when it has fewer than two distinct points.
double report_spacing(const std::vector<Vector>& solutions);

/// One episode of `algorithm` scored against the problem's front samples.
/// `network` is required for the agent and ignored otherwise.
RunRecord run_algorithm(const Problem& problem, std::string_view algorithm, int run, std::uint64_t seed,
                        const HarnessConfig& cfg, const std::vector<Vector>& front, const QNetwork* network);

// --- training ----------------------------------------------------------------

struct RetainedCheckpoint {
    Checkpoint checkpoint;
    double total_reward = 0.0;
};

/// Top-k by total episode reward; ties keep the earlier game.
class CheckpointPool {
  public:
    explicit CheckpointPool(std::size_t capacity) : capacity_(capacity) {}
    /// Returns true when the entry was kept.
    bool offer(RetainedCheckpoint entry);
    /// Best reward first.
    const std::vector<RetainedCheckpoint>& entries() const { return entries_; }

  private:
    std::size_t capacity_;
    std::vector<RetainedCheckpoint> entries_;
};

inline constexpr std::size_t kRetainedCheckpoints = 5;

/// First game index (0-based) that may enter the checkpoint pool: ceil(0.8 n_game).
int retention_start(int n_game);

/// Seed of training game `game` under a root seed.
std::uint64_t training_seed(std::uint64_t root, int game);

struct TrainResult {
    std::vector<double> rewards;
    std::vector<double> epsilons;
    std::vector<RetainedCheckpoint> retained;
    std::vector<std::filesystem::path> files;
    std::vector<double> validation_igd;
    std::size_t best = 0;
    std::filesystem::path best_file;
};

/// Trains one agent on `problem` for n_game episodes. Writes into <out_dir>/<problem>/:
/// training_curve.csv, checkpoint_<k>.bin (k = 1 best reward), checkpoints.csv and best.bin
/// (lowest mean IGD over validation_runs greedy runs).
TrainResult train(const HarnessConfig& cfg, ProblemId problem, std::ostream* progress = nullptr);

void write_training_curve(std::ostream& out, const TrainResult& result);

// --- evaluation and comparison -------------------------------------------------

/// Greedy runs of a checkpoint (or of a baseline when cfg.algorithm names one). Writes
/// runs.csv, summary.csv and usage_<algorithm>.csv into out_dir.
std::vector<RunRecord> evaluate(const HarnessConfig& cfg, ProblemId problem, const QNetwork* network);

struct SummaryRow {
    std::string problem;
    std::string algorithm;
    Summary igd;
    Summary sp;
};

std::vector<SummaryRow> summarize_runs(const std::vector<RunRecord>& runs);

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Per-generation selection percentages for one (problem, algorithm) over its runs.
struct UsageTable {
    std::string problem;
    std::string algorithm;
    std::vector<std::array<double, kOperatorCount>> per_generation;
    std::array<double, kOperatorCount> aggregate{};
};

UsageTable operator_usage(const std::vector<RunRecord>& runs, std::string_view problem, std::string_view algorithm);

void write_usage_csv(std::ostream& out, const std::vector<UsageTable>& tables);
void write_usage_aggregate_csv(std::ostream& out, const std::vector<UsageTable>& tables);
/// Reads one usage_<algorithm>.csv back (aggregate shares are recomputed from the rows).
std::vector<UsageTable> read_usage_csv(const std::filesystem::path& path, const std::string& algorithm);

struct CompareResult {
    std::vector<RunRecord> runs;
    std::vector<SummaryRow> summary;
    std::vector<UsageTable> usage;
};

/// R runs of every algorithm (baselines only when requested) on every configured
/// problem, sharing run seeds across algorithms. Writes runs.csv, summary.csv,
/// friedman.csv, usage_<algorithm>.csv and usage_aggregate.csv into out_dir.
CompareResult compare(const HarnessConfig& cfg, bool baselines_only, std::ostream* progress = nullptr);

/// Friedman over the runs x algorithms table of one problem and metric ("igd" or "sp").
FriedmanResult friedman_for(const std::vector<RunRecord>& runs, std::string_view problem, std::string_view metric,
                            const std::vector<std::string>& algorithms);

// --- plots -------------------------------------------------------------------

struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    Vector outliers;
};

/// Quartiles by linear interpolation; whiskers reach the most extreme values within 1.5 IQR.
BoxStats box_stats(const Vector& values);

/// Reads runs.csv back into records (ops are not persisted there).
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

/// Writes boxplot_<problem>.svg and usage_<problem>_<algorithm>.svg into the report directory.
/// Throws IoError listing every missing input.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& report_dir);

std::string boxplot_svg(const std::string& problem, const std::vector<RunRecord>& runs);
std::string usage_svg(const UsageTable& table);

// --- file helpers -------------------------------------------------------------

/// Writes via a callback, surfacing open/write failures as IoError with the path.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace r2rl
