#pragma once

// Configuration-driven experiment runner: JSON configs with include-by-
// reference, model and training-set assembly, pipeline dispatch, iteration
// CSV / summary JSON / basis manifest emission, manifest reload, and run
// comparison tables.

#include "admor/fom.hpp"
#include "admor/greedy.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admor {

using Json = nlohmann::json;

// A parsed experiment description. The tree is fully resolved: every object
// of the form {"include": "file.json", ...overrides} has been replaced by
// the referenced file's content with the sibling keys merged on top.
struct ExperimentConfig {
    Json tree;
    std::string source_dir;  // directory of the config file, for includes
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(Json tree, std::string source_dir = ".");

// Applies a dotted-path override such as "greedy.tol=5e-4". The value is
// parsed as JSON when possible and falls back to a plain string.
void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value);

// Model and training-set assembly from their config blocks.
SemiImplicitFom build_model(const Json& model);
TrainingSet build_training_set(const Json& training, const SemiImplicitFom& fom);
GreedyConfig parse_greedy_config(const Json& greedy);

struct RunSummary {
    std::string pipeline;
    std::string model_id;
    std::string label;
    Index iterations = 0;
    Index l_rb = 0, l_ei = 0;
    std::string termination;
    Index fom_simulations = 0;
    double setup_seconds = 0.0;
    double total_seconds = 0.0;
    double final_delta = -1.0;
    double max_true_error = -1.0;
    std::string output_dir;
    std::map<std::string, std::string> files;  // role -> relative path

    // Exit-status convention: greedy pipelines succeeded only when they
    // terminated inside their tolerance regime.
    bool converged = false;
};

RunSummary run_experiment(const ExperimentConfig& cfg);
RunSummary read_summary(const std::string& run_dir);

// Everything needed to re-simulate a final ROM without re-running greedy.
struct ReloadedRom {
    SemiImplicitFom fom;
    ReducedBasis basis;
    std::optional<InterpBasis> interp;
    Matrix V_du;
};

ReloadedRom load_manifest(const std::string& run_dir);

// Writes comparison.csv/comparison.json plus a per-iteration overlay CSV
// with one delta/true-error/effectivity column group per run. Refuses runs
// whose model ids differ.
void compare_runs(const std::vector<std::string>& run_dirs,
                  const std::string& out_dir);

// Iteration CSV schema shared by writer, reader, and tests: mu columns are
// expanded to the parameter dimension; wall_seconds is always the final
// column so determinism checks can strip it.
std::vector<std::string> iteration_csv_header(Index param_dim);
void write_iteration_csv(const std::string& path,
                         const std::vector<IterationRecord>& history,
                         Index param_dim);
std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header);

}  // namespace admor
