#include <r2rl/env.hpp>
#include <r2rl/harness.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace r2rl {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const std::string s = trim(text);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw InvalidArgument(fmt::format("config key '{}': cannot parse '{}'", key, s));
    return value;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Setting {
    std::function<void(HarnessConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const HarnessConfig&)> get;
};

template <class T>
Setting field(T RunConfig::*member) {
    return {[member](HarnessConfig& c, std::string_view k, std::string_view v) { c.run.*member = parse_number<T>(k, v); },
            [member](const HarnessConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return num(c.run.*member);
                else
                    return std::to_string(c.run.*member);
            }};
}

template <class Getter>
Setting op_double(Getter ref) {
    return {[ref](HarnessConfig& c, std::string_view k, std::string_view v) { ref(c.params) = parse_number<double>(k, v); },
            [ref](const HarnessConfig& c) { return num(ref(const_cast<OperatorParams&>(c.params))); }};
}

const std::map<std::string, Setting, std::less<>>& settings() {
    static const std::map<std::string, Setting, std::less<>> table = [] {
        std::map<std::string, Setting, std::less<>> t;
        t["n_pop"] = field(&RunConfig::n_pop);
        t["g_max"] = field(&RunConfig::g_max);
        t["n_game"] = field(&RunConfig::n_game);
        t["gamma"] = field(&RunConfig::gamma);
        t["replay_size"] = field(&RunConfig::replay_size);
        t["batch_size"] = field(&RunConfig::batch_size);
        t["hidden_nodes"] = field(&RunConfig::hidden_nodes);
        t["hidden_layers"] = field(&RunConfig::hidden_layers);
        t["eps_initial"] = field(&RunConfig::eps_initial);
        t["eps_final"] = field(&RunConfig::eps_final);
        t["power_p"] = field(&RunConfig::power_p);
        t["target_sync"] = field(&RunConfig::target_sync);
        t["reward_c_initial"] = field(&RunConfig::reward_c_initial);
        t["reward_c_final"] = field(&RunConfig::reward_c_final);
        t["learning_rate"] = field(&RunConfig::learning_rate);
        t["reward_direction"] = field(&RunConfig::reward_direction);
        t["seed"] = field(&RunConfig::seed);

        t["ga.crossover_prob"] = op_double([](OperatorParams& p) -> double& { return p.ga.crossover_prob; });
        t["ga.sbx_eta"] = op_double([](OperatorParams& p) -> double& { return p.ga.sbx_eta; });
        t["ga.mutation_prob"] = op_double([](OperatorParams& p) -> double& { return p.ga.mutation_prob; });
        t["ga.mutation_eta"] = op_double([](OperatorParams& p) -> double& { return p.ga.mutation_eta; });
        t["es.parent_fraction"] = op_double([](OperatorParams& p) -> double& { return p.es.parent_fraction; });
        t["es.initial_sigma"] = op_double([](OperatorParams& p) -> double& { return p.es.initial_sigma; });
        t["es.learning_rate"] = op_double([](OperatorParams& p) -> double& { return p.es.learning_rate; });
        t["woa.spiral_b"] = op_double([](OperatorParams& p) -> double& { return p.woa.spiral_b; });
        t["woa.encircle_prob"] = op_double([](OperatorParams& p) -> double& { return p.woa.encircle_prob; });
        t["woa.a_override"] = {[](HarnessConfig& c, std::string_view k, std::string_view v) {
                                   const std::string s = trim(v);
                                   if (s.empty() || s == "none")
                                       c.params.woa.a_override.reset();
                                   else
                                       c.params.woa.a_override = parse_number<double>(k, s);
                               },
                               [](const HarnessConfig& c) {
                                   return c.params.woa.a_override ? num(*c.params.woa.a_override) : std::string("none");
                               }};
        t["eo.a1"] = op_double([](OperatorParams& p) -> double& { return p.eo.a1; });
        t["eo.a2"] = op_double([](OperatorParams& p) -> double& { return p.eo.a2; });
        t["eo.generation_prob"] = op_double([](OperatorParams& p) -> double& { return p.eo.generation_prob; });
        t["eo.pool_best"] = {[](HarnessConfig& c, std::string_view k, std::string_view v) {
                                 c.params.eo.pool_best = parse_number<int>(k, v);
                             },
                             [](const HarnessConfig& c) { return std::to_string(c.params.eo.pool_best); }};

        t["problem"] = {[](HarnessConfig& c, std::string_view, std::string_view v) {
                            std::vector<ProblemId> ids;
                            std::string_view rest = v;
                            while (!rest.empty()) {
                                const auto comma = rest.find(',');
                                const std::string name = trim(rest.substr(0, comma));
                                const auto id = parse_problem(name);
                                if (!id) throw InvalidArgument(fmt::format("unknown problem '{}'", name));
                                ids.push_back(*id);
                                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                            }
                            if (ids.empty()) throw InvalidArgument("config key 'problem' is empty");
                            c.problems = std::move(ids);
                        },
                        [](const HarnessConfig& c) {
                            std::string out;
                            for (ProblemId id : c.problems) {
                                if (!out.empty()) out += ',';
                                out += to_string(id);
                            }
                            return out;
                        }};
        t["algorithm"] = {[](HarnessConfig& c, std::string_view, std::string_view v) {
                              const std::string name = trim(v);
                              if (!is_known_algorithm(name)) throw InvalidArgument(fmt::format("unknown algorithm '{}'", name));
                              c.algorithm = name;
                          },
                          [](const HarnessConfig& c) { return c.algorithm; }};
        t["out_dir"] = {[](HarnessConfig& c, std::string_view, std::string_view v) { c.out_dir = trim(v); },
                        [](const HarnessConfig& c) { return c.out_dir; }};
        t["checkpoint"] = {[](HarnessConfig& c, std::string_view, std::string_view v) { c.checkpoint = trim(v); },
                           [](const HarnessConfig& c) { return c.checkpoint; }};
        t["checkpoint_dir"] = {[](HarnessConfig& c, std::string_view, std::string_view v) { c.checkpoint_dir = trim(v); },
                               [](const HarnessConfig& c) { return c.checkpoint_dir; }};
        t["runs"] = {[](HarnessConfig& c, std::string_view k, std::string_view v) { c.runs = parse_number<int>(k, v); },
                     [](const HarnessConfig& c) { return std::to_string(c.runs); }};
        t["validation_runs"] = {[](HarnessConfig& c, std::string_view k,
                                   std::string_view v) { c.validation_runs = parse_number<int>(k, v); },
                                [](const HarnessConfig& c) { return std::to_string(c.validation_runs); }};
        return t;
    }();
    return table;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

fs::path problem_dir(const HarnessConfig& cfg, ProblemId id) { return fs::path(cfg.out_dir) / std::string(to_string(id)); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("{}: cannot create directory: {}", dir.string(), ec.message()));
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string usage_file_name(std::string_view algorithm) { return fmt::format("usage_{}.csv", algorithm); }

void log_line(std::ostream* progress, const std::string& text) {
    if (progress) *progress << text << '\n' << std::flush;
}

}  // namespace

// --- configuration -------------------------------------------------------------

void HarnessConfig::validate() const {
    run.validate();
    params.validate();
    if (problems.empty()) throw InvalidArgument("no problem configured");
    if (!is_known_algorithm(algorithm)) throw InvalidArgument(fmt::format("unknown algorithm '{}'", algorithm));
    if (runs < 1) throw InvalidArgument(fmt::format("runs must be >= 1, got {}", runs));
    if (validation_runs < 1) throw InvalidArgument(fmt::format("validation_runs must be >= 1, got {}", validation_runs));
    if (out_dir.empty()) throw InvalidArgument("out_dir must not be empty");
}

void apply_setting(HarnessConfig& cfg, std::string_view key, std::string_view value) {
    const auto it = settings().find(key);
    if (it == settings().end()) throw InvalidArgument(fmt::format("unknown config key '{}'", key));
    it->second.set(cfg, key, value);
}

HarnessConfig parse_config(std::istream& in, const std::string& source, HarnessConfig base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(fmt::format("{}:{}: expected key=value, got '{}'", source, lineno, text));
        try {
            apply_setting(base, trim(std::string_view(text).substr(0, eq)), std::string_view(text).substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(fmt::format("{}:{}: {}", source, lineno, e.what()));
        }
    }
    return base;
}

HarnessConfig load_config(const std::string& path, HarnessConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("{}: cannot open config file", path));
    return parse_config(in, path, std::move(base));
}

std::string canonical_config(const HarnessConfig& cfg) {
    std::string out;
    for (const auto& [key, setting] : settings()) out += fmt::format("{}={}\n", key, setting.get(cfg));
    return out;
}

std::string config_hash(const HarnessConfig& cfg) {
    // Output locations do not change what is trained, so they stay out of the hash.
    std::string text;
    for (const auto& [key, setting] : settings())
        if (key != "out_dir" && key != "checkpoint" && key != "checkpoint_dir")
            text += fmt::format("{}={}\n", key, setting.get(cfg));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

// --- algorithms ------------------------------------------------------------------

const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{std::string(kAgentAlgorithm), "R2-EO", "R2-WOA", "R2-TLBO",
                                                "R2-ES", "R2-GA", std::string(kRandomAlgorithm)};
    return names;
}

std::vector<std::string> baseline_names() {
    const auto& all = algorithm_names();
    return {all.begin() + 1, all.end()};
}

std::optional<OperatorId> fixed_operator_of(std::string_view algorithm) {
    if (!algorithm.starts_with("R2-")) return std::nullopt;
    return parse_operator(algorithm.substr(3));
}

bool is_known_algorithm(std::string_view algorithm) {
    const auto& all = algorithm_names();
    return std::find(all.begin(), all.end(), algorithm) != all.end();
}

std::uint64_t run_seed(std::uint64_t root, int run) {
    return derive_seed(root, Stream::run, static_cast<std::uint64_t>(run));
}

double report_spacing(const std::vector<Vector>& solutions) {
    if (solutions.size() < 2) return 0.0;
    const bool all_same = std::all_of(solutions.begin(), solutions.end(),
                                      [&](const Vector& p) { return p == solutions.front(); });
    return all_same ? 0.0 : spacing(solutions);
}

RunRecord run_algorithm(const Problem& problem, std::string_view algorithm, int run, std::uint64_t seed,
                        const HarnessConfig& cfg, const std::vector<Vector>& front, const QNetwork* network) {
    Policy policy;
    if (algorithm == kAgentAlgorithm) {
        if (network == nullptr) throw InvalidArgument("R2-RLMOEA runs need a trained network");
        policy = Policy::greedy();
    } else if (algorithm == kRandomAlgorithm) {
        policy = Policy::random();
    } else if (const auto op = fixed_operator_of(algorithm)) {
        policy = Policy::fixed_operator(*op);
    } else {
        throw InvalidArgument(fmt::format("unknown algorithm '{}'", algorithm));
    }

    const EpisodeSpec spec{problem, cfg.run, cfg.params, policy, seed, 0.0};
    const EpisodeLog log = policy.mode == PolicyMode::eval ? run_episode(spec, *network) : run_episode(spec, nullptr);

    RunRecord rec;
    rec.problem = std::string(problem.name());
    rec.algorithm = std::string(algorithm);
    rec.run = run;
    rec.seed = seed;
    const std::vector<Vector> final_set = final_solution_set(log.final_population);
    rec.igd = igd(final_set, front);
    rec.sp = report_spacing(final_set);
    rec.ops.reserve(log.records.size());
    for (const GenerationRecord& g : log.records) rec.ops.push_back(g.op);
    return rec;
}

// --- training ----------------------------------------------------------------------

bool CheckpointPool::offer(RetainedCheckpoint entry) {
    if (capacity_ == 0) return false;
    if (entries_.size() == capacity_ && !(entry.total_reward > entries_.back().total_reward)) return false;
    const auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry.total_reward,
                                      [](double r, const RetainedCheckpoint& e) { return r > e.total_reward; });
    entries_.insert(pos, std::move(entry));
    if (entries_.size() > capacity_) entries_.pop_back();
    return true;
}

int retention_start(int n_game) {
    if (n_game < 1) throw InvalidArgument("retention_start: n_game must be >= 1");
    // ceil(0.8 n) in integers
    return (4 * n_game + 4) / 5;
}

std::uint64_t training_seed(std::uint64_t root, int game) {
    return derive_seed(root, Stream::init, static_cast<std::uint64_t>(game));
}

TrainResult train(const HarnessConfig& cfg, ProblemId id, std::ostream* progress) {
    cfg.validate();
    const Problem problem(id);
    const fs::path dir = problem_dir(cfg, id);
    ensure_dir(dir);

    const std::uint64_t seed = cfg.run.seed;
    const std::string hash = config_hash(cfg);
    Rng net_rng = make_rng(seed, Stream::network);
    DdqnAgent agent(cfg.run, net_rng);
    CheckpointPool pool(kRetainedCheckpoints);
    const int start = retention_start(cfg.run.n_game);
    const int report_every = std::max(1, cfg.run.n_game / 20);

    TrainResult result;
    for (int game = 0; game < cfg.run.n_game; ++game) {
        const double eps = epsilon_schedule(game, cfg.run);
        const EpisodeSpec spec{problem, cfg.run, cfg.params, Policy::train(), training_seed(seed, game), eps};
        const EpisodeLog log = run_episode(spec, &agent);
        result.rewards.push_back(log.total_reward);
        result.epsilons.push_back(eps);
        if (game >= start) {
            CheckpointMeta meta{seed, game, game + 1, log.total_reward, hash, std::string(problem.name())};
            pool.offer({Checkpoint{agent.main(), std::move(meta)}, log.total_reward});
        }
        if ((game + 1) % report_every == 0 || game + 1 == cfg.run.n_game)
            log_line(progress, fmt::format("{} game {}/{} reward {:.3f} epsilon {:.4f}", problem.name(), game + 1,
                                           cfg.run.n_game, log.total_reward, eps));
    }
    result.retained = pool.entries();

    const std::vector<Vector> front = problem.pareto_front_samples(problem.default_front_size());
    double best_igd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < result.retained.size(); ++k) {
        const QNetwork& net = result.retained[k].checkpoint.network;
        double total = 0.0;
        for (int r = 0; r < cfg.validation_runs; ++r) {
            const std::uint64_t vs = derive_seed(seed, Stream::validation, static_cast<std::uint64_t>(r));
            total += run_algorithm(problem, kAgentAlgorithm, r, vs, cfg, front, &net).igd;
        }
        const double mean = total / cfg.validation_runs;
        result.validation_igd.push_back(mean);
        if (mean < best_igd) {
            best_igd = mean;
            result.best = k;
        }
        const fs::path file = dir / fmt::format("checkpoint_{}.bin", k + 1);
        save_checkpoint(result.retained[k].checkpoint, file.string());
        result.files.push_back(file);
    }

    write_file(dir / "training_curve.csv", [&](std::ostream& out) { write_training_curve(out, result); });
    write_file(dir / "checkpoints.csv", [&](std::ostream& out) {
        out << "rank,file,game,total_reward,validation_igd,selected\n";
        for (std::size_t k = 0; k < result.retained.size(); ++k)
            out << k + 1 << ',' << result.files[k].filename().string() << ','
                << result.retained[k].checkpoint.meta.game_index << ',' << num(result.retained[k].total_reward) << ','
                << num(result.validation_igd[k]) << ',' << (k == result.best ? 1 : 0) << '\n';
    });
    if (!result.retained.empty()) {
        result.best_file = dir / "best.bin";
        save_checkpoint(result.retained[result.best].checkpoint, result.best_file.string());
        log_line(progress, fmt::format("{} best checkpoint: game {} (validation IGD {:.6f})", problem.name(),
                                       result.retained[result.best].checkpoint.meta.game_index, best_igd));
    }
    return result;
}

void write_training_curve(std::ostream& out, const TrainResult& result) {
    out << "game,total_reward,epsilon\n";
    for (std::size_t g = 0; g < result.rewards.size(); ++g)
        out << g << ',' << num(result.rewards[g]) << ',' << num(result.epsilons[g]) << '\n';
}

// --- evaluation --------------------------------------------------------------------

std::vector<RunRecord> evaluate(const HarnessConfig& cfg, ProblemId id, const QNetwork* network) {
    cfg.validate();
    if (cfg.algorithm == kAgentAlgorithm) {
        if (network == nullptr) throw InvalidArgument("evaluate: R2-RLMOEA needs a checkpoint");
        if (network->widths() != QNetwork::widths_for(cfg.run))
            throw InvalidArgument("evaluate: checkpoint architecture does not match the configured network");
    }
    const Problem problem(id);
    const std::vector<Vector> front = problem.pareto_front_samples(problem.default_front_size());
    std::vector<RunRecord> out;
    for (int r = 0; r < cfg.runs; ++r)
        out.push_back(run_algorithm(problem, cfg.algorithm, r, run_seed(cfg.run.seed, r), cfg, front, network));

    const fs::path out_dir(cfg.out_dir);
    ensure_dir(out_dir);
    write_file(out_dir / "runs.csv", [&](std::ostream& o) { write_runs_csv(o, out); });
    write_file(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, summarize_runs(out)); });
    const std::vector<UsageTable> usage{operator_usage(out, problem.name(), cfg.algorithm)};
    write_file(out_dir / usage_file_name(cfg.algorithm), [&](std::ostream& o) { write_usage_csv(o, usage); });
    return out;
}

std::vector<SummaryRow> summarize_runs(const std::vector<RunRecord>& runs) {
    std::vector<SummaryRow> rows;
    std::vector<std::pair<std::string, std::string>> keys;
    for (const RunRecord& r : runs)
        if (std::find(keys.begin(), keys.end(), std::pair{r.problem, r.algorithm}) == keys.end())
            keys.emplace_back(r.problem, r.algorithm);
    for (const auto& [problem, algorithm] : keys) {
        Vector igds, sps;
        for (const RunRecord& r : runs)
            if (r.problem == problem && r.algorithm == algorithm) {
                igds.push_back(r.igd);
                sps.push_back(r.sp);
            }
        rows.push_back({problem, algorithm, summarize(igds), summarize(sps)});
    }
    return rows;
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
    out << "problem,algorithm,run,seed,igd,sp\n";
    for (const RunRecord& r : runs)
        out << r.problem << ',' << r.algorithm << ',' << r.run << ',' << r.seed << ',' << num(r.igd) << ','
            << num(r.sp) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "problem,algorithm,igd_mean,igd_min,igd_std,sp_mean,sp_min,sp_std\n";
    for (const SummaryRow& r : rows)
        out << r.problem << ',' << r.algorithm << ',' << num(r.igd.mean) << ',' << num(r.igd.min) << ','
            << num(r.igd.std) << ',' << num(r.sp.mean) << ',' << num(r.sp.min) << ',' << num(r.sp.std) << '\n';
}

UsageTable operator_usage(const std::vector<RunRecord>& runs, std::string_view problem, std::string_view algorithm) {
    UsageTable t;
    t.problem = std::string(problem);
    t.algorithm = std::string(algorithm);
    std::vector<std::array<int, kOperatorCount>> counts;
    std::size_t n_runs = 0;
    for (const RunRecord& r : runs) {
        if (r.problem != problem || r.algorithm != algorithm) continue;
        ++n_runs;
        if (counts.size() < r.ops.size()) counts.resize(r.ops.size(), std::array<int, kOperatorCount>{});
        for (std::size_t g = 0; g < r.ops.size(); ++g) ++counts[g][static_cast<std::size_t>(r.ops[g])];
    }
    if (n_runs == 0) throw InvalidArgument(fmt::format("operator_usage: no runs for {} / {}", problem, algorithm));
    std::array<long long, kOperatorCount> total{};
    long long draws = 0;
    for (const auto& row : counts) {
        std::array<double, kOperatorCount> pct{};
        for (std::size_t k = 0; k < kOperatorCount; ++k) {
            pct[k] = 100.0 * row[k] / static_cast<double>(n_runs);
            total[k] += row[k];
            draws += row[k];
        }
        t.per_generation.push_back(pct);
    }
    for (std::size_t k = 0; k < kOperatorCount; ++k)
        t.aggregate[k] = draws > 0 ? 100.0 * static_cast<double>(total[k]) / static_cast<double>(draws) : 0.0;
    return t;
}

void write_usage_csv(std::ostream& out, const std::vector<UsageTable>& tables) {
    out << "problem,generation,pct_eo,pct_woa,pct_tlbo,pct_es,pct_ga\n";
    for (const UsageTable& t : tables)
        for (std::size_t g = 0; g < t.per_generation.size(); ++g) {
            out << t.problem << ',' << g + 1;
            for (double v : t.per_generation[g]) out << ',' << num(v);
            out << '\n';
        }
}

void write_usage_aggregate_csv(std::ostream& out, const std::vector<UsageTable>& tables) {
    out << "problem,algorithm,pct_eo,pct_woa,pct_tlbo,pct_es,pct_ga\n";
    for (const UsageTable& t : tables) {
        out << t.problem << ',' << t.algorithm;
        for (double v : t.aggregate) out << ',' << num(v);
        out << '\n';
    }
}

std::vector<UsageTable> read_usage_csv(const fs::path& path, const std::string& algorithm) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("{}: cannot open usage file", path.string()));
    std::string line;
    std::getline(in, line);
    if (trim(line) != "problem,generation,pct_eo,pct_woa,pct_tlbo,pct_es,pct_ga")
        throw IoError(fmt::format("{}: unexpected header", path.string()));
    std::vector<UsageTable> tables;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(trim(line));
        if (cells.size() != 2 + kOperatorCount)
            throw IoError(fmt::format("{}:{}: expected {} fields", path.string(), lineno, 2 + kOperatorCount));
        if (tables.empty() || tables.back().problem != cells[0]) tables.push_back({cells[0], algorithm, {}, {}});
        std::array<double, kOperatorCount> row{};
        try {
            for (std::size_t k = 0; k < kOperatorCount; ++k) row[k] = parse_number<double>("pct", cells[2 + k]);
        } catch (const InvalidArgument& e) {
            throw IoError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
        tables.back().per_generation.push_back(row);
    }
    for (UsageTable& t : tables) {
        double sum = 0.0;
        for (const auto& row : t.per_generation)
            for (std::size_t k = 0; k < kOperatorCount; ++k) {
                t.aggregate[k] += row[k];
                sum += row[k];
            }
        for (double& v : t.aggregate) v = sum > 0.0 ? 100.0 * v / sum : 0.0;
    }
    return tables;
}

FriedmanResult friedman_for(const std::vector<RunRecord>& runs, std::string_view problem, std::string_view metric,
                            const std::vector<std::string>& algorithms) {
    if (metric != "igd" && metric != "sp") throw InvalidArgument(fmt::format("unknown metric '{}'", metric));
    std::map<int, Vector> rows;
    for (const RunRecord& r : runs) {
        if (r.problem != problem) continue;
        const auto col = std::find(algorithms.begin(), algorithms.end(), r.algorithm);
        if (col == algorithms.end()) continue;
        Vector& row = rows[r.run];
        row.resize(algorithms.size(), std::numeric_limits<double>::quiet_NaN());
        row[static_cast<std::size_t>(col - algorithms.begin())] = metric == "igd" ? r.igd : r.sp;
    }
    std::vector<Vector> table;
    for (auto& [run, row] : rows) {
        for (double v : row)
            if (std::isnan(v)) throw InvalidArgument(fmt::format("friedman_for: run {} lacks an algorithm", run));
        table.push_back(std::move(row));
    }
    return friedman(table);
}

CompareResult compare(const HarnessConfig& cfg, bool baselines_only, std::ostream* progress) {
    cfg.validate();
    const std::vector<std::string> algorithms = baselines_only ? baseline_names() : algorithm_names();
    const fs::path out_dir(cfg.out_dir);

    std::map<ProblemId, QNetwork> networks;
    if (!baselines_only) {
        const fs::path ckpt_root(cfg.checkpoint_dir.empty() ? cfg.out_dir : cfg.checkpoint_dir);
        std::vector<std::string> missing;
        for (ProblemId id : cfg.problems) {
            const fs::path file = ckpt_root / std::string(to_string(id)) / "best.bin";
            if (!fs::exists(file)) missing.push_back(file.string());
        }
        if (!missing.empty()) {
            std::string list;
            for (const std::string& m : missing) list += "\n  " + m;
            throw IoError(fmt::format("compare: missing trained checkpoint(s) (use --baselines-only to skip the agent):{}",
                                      list));
        }
        for (ProblemId id : cfg.problems) {
            QNetwork net = load_checkpoint((ckpt_root / std::string(to_string(id)) / "best.bin").string()).network;
            if (net.widths() != QNetwork::widths_for(cfg.run))
                throw InvalidArgument(fmt::format("compare: {} checkpoint architecture does not match the config",
                                                  to_string(id)));
            networks.emplace(id, std::move(net));
        }
    }

    CompareResult result;
    for (ProblemId id : cfg.problems) {
        const Problem problem(id);
        const std::vector<Vector> front = problem.pareto_front_samples(problem.default_front_size());
        const QNetwork* net = networks.count(id) ? &networks.at(id) : nullptr;
        for (const std::string& algo : algorithms) {
            for (int r = 0; r < cfg.runs; ++r)
                result.runs.push_back(run_algorithm(problem, algo, r, run_seed(cfg.run.seed, r), cfg, front, net));
            result.usage.push_back(operator_usage(result.runs, problem.name(), algo));
            log_line(progress, fmt::format("{} {} done ({} runs)", problem.name(), algo, cfg.runs));
        }
    }
    result.summary = summarize_runs(result.runs);

    ensure_dir(out_dir);
    write_file(out_dir / "runs.csv", [&](std::ostream& out) { write_runs_csv(out, result.runs); });
    write_file(out_dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(out, result.summary); });
    write_file(out_dir / "friedman.csv", [&](std::ostream& out) {
        out << "problem,metric,algorithm,mean_rank,statistic,df,p_value\n";
        if (cfg.runs < 2) return;
        for (ProblemId id : cfg.problems)
            for (const char* metric : {"igd", "sp"}) {
                const FriedmanResult f = friedman_for(result.runs, to_string(id), metric, algorithms);
                for (std::size_t j = 0; j < algorithms.size(); ++j)
                    out << to_string(id) << ',' << metric << ',' << algorithms[j] << ',' << num(f.mean_ranks[j]) << ','
                        << num(f.statistic) << ',' << f.degrees_of_freedom << ',' << num(f.p_value) << '\n';
            }
    });
    for (const std::string& algo : algorithms) {
        std::vector<UsageTable> tables;
        for (const UsageTable& t : result.usage)
            if (t.algorithm == algo) tables.push_back(t);
        write_file(out_dir / usage_file_name(algo), [&](std::ostream& out) { write_usage_csv(out, tables); });
    }
    write_file(out_dir / "usage_aggregate.csv", [&](std::ostream& out) { write_usage_aggregate_csv(out, result.usage); });
    return result;
}

// --- plots ---------------------------------------------------------------------------

BoxStats box_stats(const Vector& values) {
    if (values.empty()) throw InvalidArgument("box_stats: no values");
    BoxStats b;
    b.q1 = quantile(values, 0.25);
    b.median = quantile(values, 0.5);
    b.q3 = quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
            continue;
        }
        b.whisker_low = std::min(b.whisker_low, v);
        b.whisker_high = std::max(b.whisker_high, v);
    }
    std::sort(b.outliers.begin(), b.outliers.end());
    return b;
}

std::vector<RunRecord> read_runs_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("{}: cannot open per-run CSV", path.string()));
    std::string line;
    std::getline(in, line);
    if (trim(line) != "problem,algorithm,run,seed,igd,sp")
        throw IoError(fmt::format("{}: unexpected header", path.string()));
    std::vector<RunRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto c = split_csv_line(trim(line));
        if (c.size() != 6) throw IoError(fmt::format("{}:{}: expected 6 fields", path.string(), lineno));
        try {
            out.push_back({c[0], c[1], parse_number<int>("run", c[2]), parse_number<std::uint64_t>("seed", c[3]),
                           parse_number<double>("igd", c[4]), parse_number<double>("sp", c[5]), {}});
        } catch (const InvalidArgument& e) {
            throw IoError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return out;
}

std::string boxplot_svg(const std::string& problem, const std::vector<RunRecord>& runs) {
    std::vector<std::string> algos;
    for (const RunRecord& r : runs)
        if (r.problem == problem && std::find(algos.begin(), algos.end(), r.algorithm) == algos.end())
            algos.push_back(r.algorithm);
    if (algos.empty()) throw InvalidArgument(fmt::format("boxplot_svg: no runs for {}", problem));

    const double box_w = 60.0, left = 70.0, top = 40.0, plot_h = 300.0, bottom = 90.0;
    const double panel_w = box_w * static_cast<double>(algos.size()) + 20.0;
    const double width = 2.0 * (left + panel_w) + 20.0;
    const double height = top + plot_h + bottom;

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        width, height, width, height);

    for (int panel = 0; panel < 2; ++panel) {
        const bool is_igd = panel == 0;
        std::vector<Vector> columns;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const std::string& a : algos) {
            Vector v;
            for (const RunRecord& r : runs)
                if (r.problem == problem && r.algorithm == a) v.push_back(is_igd ? r.igd : r.sp);
            for (double x : v) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            columns.push_back(std::move(v));
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        const double x0 = 10.0 + panel * (left + panel_w) + left;
        auto y = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

        svg += fmt::format("<g class=\"panel\" data-metric=\"{}\">\n", is_igd ? "igd" : "sp");
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" text-anchor=\"middle\">{} {}</text>\n",
                           x0 + panel_w / 2, top - 15, xml_escape(problem), is_igd ? "IGD" : "SP");
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", x0,
                           top, top + plot_h);
        for (int t = 0; t <= 4; ++t) {
            const double v = lo + (hi - lo) * t / 4.0;
            svg += fmt::format(
                "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.4g}</text>\n", x0 - 4,
                y(v) + 3, v);
        }
        for (std::size_t j = 0; j < algos.size(); ++j) {
            const BoxStats b = box_stats(columns[j]);
            const double cx = x0 + 10.0 + box_w * (static_cast<double>(j) + 0.5);
            const double half = box_w * 0.3;
            svg += fmt::format("<g class=\"box\" data-algorithm=\"{}\" data-median=\"{}\">\n", xml_escape(algos[j]),
                               num(b.median));
            svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                               cx, y(b.whisker_high), y(b.q3));
            svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                               cx, y(b.q1), y(b.whisker_low));
            for (double w : {b.whisker_low, b.whisker_high})
                svg += fmt::format(
                    "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
                    cx - half / 2, y(w), cx + half / 2, y(w));
            svg += fmt::format(
                "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#9ecae1\" stroke=\"black\"/>\n",
                cx - half, y(b.q3), 2 * half, y(b.q1) - y(b.q3));
            svg += fmt::format(
                "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#d62728\" stroke-width=\"2\"/>\n",
                cx - half, y(b.median), cx + half, y(b.median));
            for (double o : b.outliers)
                svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n", cx,
                                   y(o));
            svg += fmt::format(
                "<text x=\"{0:.2f}\" y=\"{1:.2f}\" font-size=\"10\" text-anchor=\"end\" "
                "transform=\"rotate(-45 {0:.2f} {1:.2f})\">{2}</text>\n",
                cx, top + plot_h + 14, xml_escape(algos[j]));
            svg += "</g>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string usage_svg(const UsageTable& table) {
    static constexpr std::array<const char*, kOperatorCount> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                                    "#9467bd"};
    const double left = 60.0, top = 40.0, plot_w = 500.0, plot_h = 300.0, legend_w = 90.0;
    const double width = left + plot_w + legend_w + 20.0, height = top + plot_h + 50.0;
    const std::size_t n = table.per_generation.size();

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" text-anchor=\"middle\">{} {} operator usage (%)</text>\n",
        width, height, width, height, left + plot_w / 2, top - 15, xml_escape(table.problem),
        xml_escape(table.algorithm));
    auto px = [&](std::size_t g) { return left + (n > 1 ? plot_w * static_cast<double>(g) / (n - 1) : plot_w / 2); };
    auto py = [&](double pct) { return top + plot_h * (1.0 - pct / 100.0); };

    std::vector<double> base(n, 0.0);
    for (std::size_t k = 0; k < kOperatorCount; ++k) {
        std::string points;
        for (std::size_t g = 0; g < n; ++g)
            points += fmt::format("{:.2f},{:.2f} ", px(g), py(base[g] + table.per_generation[g][k]));
        for (std::size_t g = n; g-- > 0;) points += fmt::format("{:.2f},{:.2f} ", px(g), py(base[g]));
        if (!points.empty()) points.pop_back();
        svg += fmt::format("<polygon class=\"layer\" data-operator=\"{}\" points=\"{}\" fill=\"{}\" stroke=\"none\"/>\n",
                           to_string(kAllOperators[k]), points, colors[k]);
        for (std::size_t g = 0; g < n; ++g) base[g] += table.per_generation[g][k];
        svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                           left + plot_w + 15, top + 20.0 * k, colors[k]);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\">{} {:.1f}%</text>\n", left + plot_w + 31,
                           top + 20.0 * k + 10, to_string(kAllOperators[k]), table.aggregate[k]);
    }
    svg += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n", left,
        top, plot_w, plot_h);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">generation</text>\n",
                       left + plot_w / 2, top + plot_h + 30);
    svg += "</svg>\n";
    return svg;
}

std::vector<fs::path> emit_plots(const fs::path& report_dir) {
    const fs::path runs_file = report_dir / "runs.csv";
    if (!fs::exists(runs_file)) throw IoError(fmt::format("plot: missing input files:\n  {}", runs_file.string()));
    const std::vector<RunRecord> runs = read_runs_csv(runs_file);
    if (runs.empty()) throw IoError(fmt::format("{}: no runs recorded", runs_file.string()));

    std::vector<std::string> problems, algos;
    for (const RunRecord& r : runs) {
        if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) problems.push_back(r.problem);
        if (std::find(algos.begin(), algos.end(), r.algorithm) == algos.end()) algos.push_back(r.algorithm);
    }
    std::vector<std::string> missing;
    for (const std::string& a : algos)
        if (!fs::exists(report_dir / usage_file_name(a))) missing.push_back((report_dir / usage_file_name(a)).string());
    if (!missing.empty()) {
        std::string list;
        for (const std::string& m : missing) list += "\n  " + m;
        throw IoError(fmt::format("plot: missing input files:{}", list));
    }

    std::vector<fs::path> written;
    for (const std::string& p : problems) {
        const fs::path file = report_dir / fmt::format("boxplot_{}.svg", p);
        const std::string svg = boxplot_svg(p, runs);
        write_file(file, [&](std::ostream& out) { out << svg; });
        written.push_back(file);
    }
    for (const std::string& a : algos)
        for (const UsageTable& t : read_usage_csv(report_dir / usage_file_name(a), a)) {
            const fs::path file = report_dir / fmt::format("usage_{}_{}.svg", t.problem, a);
            const std::string svg = usage_svg(t);
            write_file(file, [&](std::ostream& out) { out << svg; });
            written.push_back(file);
        }
    return written;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    body(out);
    out.flush();
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

}  // namespace r2rl
