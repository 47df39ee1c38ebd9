// Command-line front end: train / evaluate / compare / plot.

#include <r2rl/harness.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> runs;
    bool baselines_only = false;
    std::vector<std::string> settings;
    std::string checkpoint;
};

r2rl::HarnessConfig resolve(const Options& opt) {
    r2rl::HarnessConfig cfg;
    if (!opt.config.empty()) cfg = r2rl::load_config(opt.config);
    for (const std::string& kv : opt.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw r2rl::InvalidArgument(fmt::format("--set expects key=value, got '{}'", kv));
        r2rl::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed) cfg.run.seed = *opt.seed;
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    if (opt.runs) cfg.runs = *opt.runs;
    if (!opt.checkpoint.empty()) cfg.checkpoint = opt.checkpoint;
    cfg.validate();
    return cfg;
}

int cmd_train(const Options& opt) {
    const r2rl::HarnessConfig cfg = resolve(opt);
    for (r2rl::ProblemId id : cfg.problems) {
        const r2rl::TrainResult res = r2rl::train(cfg, id, &std::cerr);
        std::cout << fmt::format("{}: {} checkpoints, best {}\n", r2rl::to_string(id), res.files.size(),
                                 res.best_file.string());
    }
    return kOk;
}

int cmd_evaluate(const Options& opt) {
    r2rl::HarnessConfig cfg = resolve(opt);
    if (cfg.problems.size() != 1) throw r2rl::InvalidArgument("evaluate takes exactly one problem");
    const r2rl::ProblemId id = cfg.problems.front();
    std::optional<r2rl::QNetwork> net;
    if (cfg.algorithm == r2rl::kAgentAlgorithm) {
        const std::string path = cfg.checkpoint.empty()
                                     ? (std::filesystem::path(cfg.out_dir) / std::string(r2rl::to_string(id)) / "best.bin")
                                           .string()
                                     : cfg.checkpoint;
        net = r2rl::load_checkpoint(path).network;
    }
    const auto runs = r2rl::evaluate(cfg, id, net ? &*net : nullptr);
    for (const r2rl::SummaryRow& row : r2rl::summarize_runs(runs))
        std::cout << fmt::format("{} {}: IGD mean {:.6g} min {:.6g} std {:.6g} | SP mean {:.6g} min {:.6g} std {:.6g}\n",
                                 row.problem, row.algorithm, row.igd.mean, row.igd.min, row.igd.std, row.sp.mean,
                                 row.sp.min, row.sp.std);
    return kOk;
}

int cmd_compare(const Options& opt) {
    const r2rl::HarnessConfig cfg = resolve(opt);
    const r2rl::CompareResult res = r2rl::compare(cfg, opt.baselines_only, &std::cerr);
    for (const r2rl::SummaryRow& row : res.summary)
        std::cout << fmt::format("{} {}: IGD mean {:.6g} | SP mean {:.6g}\n", row.problem, row.algorithm, row.igd.mean,
                                 row.sp.mean);
    return kOk;
}

int cmd_plot(const Options& opt) {
    r2rl::HarnessConfig cfg;
    if (!opt.config.empty()) cfg = r2rl::load_config(opt.config);
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    for (const auto& file : r2rl::emit_plots(cfg.out_dir)) std::cout << file.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"R2 indicator guided operator selection with a double deep Q-network"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "key=value configuration file");
    app.add_option("--seed", opt.seed, "root seed (overrides the config)");
    app.add_option("--out", opt.out, "output directory (overrides out_dir)");
    app.add_option("--runs", opt.runs, "runs per problem and algorithm")->check(CLI::PositiveNumber);
    app.add_flag("--baselines-only", opt.baselines_only, "compare: skip the trained agent");
    app.add_option("--set", opt.settings, "extra key=value setting, applied after the config file");
    app.add_option("--checkpoint", opt.checkpoint, "evaluate: checkpoint file");

    auto* train = app.add_subcommand("train", "train the agent and keep the top checkpoints");
    auto* evaluate = app.add_subcommand("evaluate", "greedy runs of a checkpoint (or of a baseline algorithm)");
    auto* compare = app.add_subcommand("compare", "agent against the fixed-operator and random baselines");
    auto* plot = app.add_subcommand("plot", "box plots and operator-usage plots from a report directory");
    for (auto* sub : {train, evaluate, compare, plot}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*train) return cmd_train(opt);
        if (*evaluate) return cmd_evaluate(opt);
        if (*compare) return cmd_compare(opt);
        if (*plot) return cmd_plot(opt);
    } catch (const r2rl::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const r2rl::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const r2rl::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}
