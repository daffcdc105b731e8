// mor: model-order-reduction experiment driver.
//
// Subcommands load a JSON config, apply command-line overrides, run one
// pipeline, and leave all artifacts (iterations.csv, summary.json,
// manifest.json, bases) in the configured output directory.
//
// Exit status: 0 on success; for greedy/adaptive/twoway "success" means the
// run terminated inside its tolerance regime (tol or zone of acceptance).
// Nonconverged runs exit 2, configuration or I/O errors exit 1.

#include "admor/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string label;
    long long jobs = -1;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", args.sets,
                    "override a config value, e.g. --set greedy.tol=5e-4")
        ->take_all();
    cmd->add_option("-o,--out", args.out, "output directory (overrides config)");
    cmd->add_option("--label", args.label, "run label (overrides config)");
    cmd->add_option("--jobs", args.jobs, "indicator-sweep worker threads");
    cmd->add_option("--seed", args.seed, "initial-parameter selection seed");
}

admor::ExperimentConfig load_with_overrides(const CommonArgs& args,
                                            const std::string& pipeline) {
    admor::ExperimentConfig cfg = admor::load_config(args.config);
    if (!pipeline.empty()) cfg.tree["pipeline"] = pipeline;
    for (const std::string& s : args.sets) admor::apply_override(cfg, s);
    if (!args.out.empty()) cfg.tree["output_dir"] = args.out;
    if (!args.label.empty()) cfg.tree["label"] = args.label;
    if (args.jobs >= 0) cfg.tree["greedy"]["jobs"] = args.jobs;
    if (args.seed >= 0) cfg.tree["greedy"]["seed"] = args.seed;
    return cfg;
}

int run_config(const admor::ExperimentConfig& cfg, bool exit_on_nonconverged) {
    const admor::RunSummary s = admor::run_experiment(cfg);
    std::printf(
        "%s [%s] %s: %lld iterations, l_rb=%lld, l_ei=%lld, %s, "
        "%lld FOM simulations, %.2f s\n",
        s.pipeline.c_str(), s.model_id.c_str(), s.label.c_str(),
        static_cast<long long>(s.iterations), static_cast<long long>(s.l_rb),
        static_cast<long long>(s.l_ei), s.termination.c_str(),
        static_cast<long long>(s.fom_simulations), s.total_seconds);
    std::printf("artifacts in %s\n", s.output_dir.c_str());
    if (exit_on_nonconverged && !s.converged) return 2;
    return 0;
}

int run_pipeline(const CommonArgs& args, const std::string& pipeline,
                 bool exit_on_nonconverged) {
    return run_config(load_with_overrides(args, pipeline),
                      exit_on_nonconverged);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-order-reduction toolkit"};
    app.require_subcommand(1);

    CommonArgs fom_args, greedy_args, adaptive_args, twoway_args, infsup_args;

    CLI::App* fom_cmd =
        app.add_subcommand("fom-sim", "simulate the full-order model once");
    add_common(fom_cmd, fom_args);

    CLI::App* greedy_cmd = app.add_subcommand(
        "greedy",
        "standard POD-greedy (with a precomputed interpolation basis unless "
        "--exact-nonlinearity)");
    add_common(greedy_cmd, greedy_args);
    bool greedy_exact = false;
    greedy_cmd->add_flag("--exact-nonlinearity", greedy_exact,
                         "evaluate the nonlinearity exactly in the ROM");

    CLI::App* adaptive_cmd = app.add_subcommand(
        "adaptive", "adaptive POD-greedy with coupled basis-size updates");
    add_common(adaptive_cmd, adaptive_args);

    CLI::App* twoway_cmd = app.add_subcommand(
        "twoway", "two-way size adaptation of prebuilt conservative bases");
    add_common(twoway_cmd, twoway_args);

    CLI::App* infsup_cmd = app.add_subcommand(
        "infsup", "validate the stability-constant surrogate over a sweep");
    add_common(infsup_cmd, infsup_args);

    std::vector<std::string> compare_dirs;
    std::string compare_out = "comparison";
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "tabulate finished runs side by side");
    compare_cmd
        ->add_option("runs", compare_dirs, "run directories (two or more)")
        ->required()
        ->expected(-2);
    compare_cmd->add_option("-o,--out", compare_out, "comparison output dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fom_cmd->parsed()) return run_pipeline(fom_args, "fom-sim", false);
        if (greedy_cmd->parsed()) {
            admor::ExperimentConfig cfg = load_with_overrides(greedy_args, "");
            const std::string from_config =
                cfg.tree.value("pipeline", std::string("standard-deim"));
            cfg.tree["pipeline"] =
                greedy_exact
                    ? "standard"
                    : (from_config == "standard" ? "standard"
                                                 : "standard-deim");
            return run_config(cfg, true);
        }
        if (adaptive_cmd->parsed())
            return run_pipeline(adaptive_args, "adaptive-greedy", true);
        if (twoway_cmd->parsed())
            return run_pipeline(twoway_args, "twoway", true);
        if (infsup_cmd->parsed())
            return run_pipeline(infsup_args, "infsup-validate", false);
        if (compare_cmd->parsed()) {
            admor::compare_runs(compare_dirs, compare_out);
            std::printf("comparison written to %s\n", compare_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
