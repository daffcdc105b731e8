#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/experiment.hpp"
#include "admor/reduction.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace admor;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "admor_experiment_test" /
                         name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// The wall-seconds column is timing noise; everything before it must be
// byte-identical across reruns.
std::vector<std::string> csv_without_wall(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        lines.push_back(line.substr(0, comma));
    }
    return lines;
}

Json tiny_rd_run(const std::string& out_dir) {
    Json t;
    t["pipeline"] = "standard";
    t["label"] = "tiny";
    t["output_dir"] = out_dir;
    t["model"] = {{"id", "reaction-diffusion"}, {"n", 24},
                  {"dt", 0.001},     {"horizon", 0.06},
                  {"snapshot_stride", 6}};
    t["training"] = {{"kind", "list"}, {"points", Json::array({Json::array()})}};
    t["greedy"] = {{"tol", 1e-7}, {"max_iter", 10}};
    return t;
}

}  // namespace

TEST_CASE("config include resolution merges siblings over file content") {
    const fs::path dir = temp_dir("includes");
    write_file(dir / "model.json",
               R"({"id": "burgers", "n": 500, "dt": 0.0004, "horizon": 2.0,
                   "mu_min": 0.0005, "mu_max": 1.0})");
    write_file(dir / "exp.json",
               R"({"pipeline": "fom-sim",
                   "model": {"include": "model.json", "n": 32}})");

    const ExperimentConfig cfg = load_config((dir / "exp.json").string());
    CHECK(cfg.tree.at("model").at("id") == "burgers");
    CHECK(cfg.tree.at("model").at("n") == 32);  // sibling override wins
    CHECK(cfg.tree.at("model").at("mu_min") == 0.0005);
    CHECK_FALSE(cfg.tree.at("model").contains("include"));
}

TEST_CASE("cyclic includes are refused") {
    const fs::path dir = temp_dir("cycles");
    write_file(dir / "a.json", R"({"x": {"include": "a.json"}})");
    CHECK_THROWS(load_config((dir / "a.json").string()));
}

TEST_CASE("dotted overrides parse values as JSON with string fallback") {
    ExperimentConfig cfg = config_from_json(Json::object());
    apply_override(cfg, "greedy.tol=5e-4");
    apply_override(cfg, "model.n=64");
    apply_override(cfg, "label=my run");
    apply_override(cfg, "greedy.method=eim");
    CHECK(cfg.tree.at("greedy").at("tol") == 5e-4);
    CHECK(cfg.tree.at("model").at("n") == 64);
    CHECK(cfg.tree.at("label") == "my run");
    CHECK(cfg.tree.at("greedy").at("method") == "eim");
    CHECK_THROWS(apply_override(cfg, "no_equals_sign"));
}

TEST_CASE("model and training assembly from config blocks") {
    Json burgers = {{"id", "burgers"},    {"n", 48},
                    {"dt", 0.001},        {"horizon", 0.1},
                    {"mu_min", 0.01},     {"mu_max", 1.0},
                    {"snapshot_stride", 5}};
    const SemiImplicitFom fom = build_model(burgers);
    CHECK(fom.model_id == "burgers");
    CHECK(fom.n == 48);

    const TrainingSet xi =
        build_training_set({{"kind", "log-uniform"}, {"count", 7}}, fom);
    REQUIRE(xi.size() == 7);
    CHECK(std::abs(xi.front()[0] - 0.01) < 1e-14);

    CHECK_THROWS(build_training_set({{"kind", "grid"}, {"n0", 2}, {"n1", 2}},
                                    fom));  // needs a 2-d domain
    CHECK_THROWS(build_training_set(
        {{"kind", "list"}, {"points", Json::array({Json::array({5.0})})}},
        fom));  // outside the domain
    CHECK_THROWS(build_model(Json{{"id", "unknown-model"}}));

    GreedyConfig g = parse_greedy_config(
        {{"tol", 1e-2}, {"method", "deim"}, {"mode", "original"}, {"jobs", 3}});
    CHECK(g.tol == 1e-2);
    CHECK(g.method == InterpMethod::deim);
    CHECK(g.mode == IndicatorMode::original);
    CHECK(g.jobs == 3);
    CHECK(g.tol_ei() == 0.01 * 1e-2);
}

TEST_CASE("iteration CSV round trip preserves values including infinities") {
    std::vector<IterationRecord> history(2);
    history[0].iteration = 1;
    history[0].mu_star = Vector::Constant(1, 0.25);
    history[0].l_rb = 3;
    history[0].l_ei = 7;
    history[0].delta = std::numeric_limits<double>::infinity();
    history[0].delta_max = history[0].delta;
    history[0].rho = 0.875;
    history[1].iteration = 2;
    history[1].mu_star = Vector::Constant(1, 1.0 / 3.0);
    history[1].l_rb = 4;
    history[1].l_ei = 9;
    history[1].delta = 4.25e-4;
    history[1].wall_seconds = 1.5;

    const fs::path dir = temp_dir("csv");
    const std::string path = (dir / "iterations.csv").string();
    write_iteration_csv(path, history, 1);

    std::vector<std::string> header;
    const auto rows = read_csv(path, &header);
    REQUIRE(rows.size() == 2);
    CHECK(header == iteration_csv_header(1));
    CHECK(header.back() == "wall_seconds");
    const size_t mu_col = 1, delta_col = 0;
    CHECK(rows[0][mu_col] == 0.25);
    CHECK(std::isinf(rows[0][7]));
    CHECK(rows[1][mu_col] == 1.0 / 3.0);  // %.17g survives the round trip
    CHECK(rows[1][7] == 4.25e-4);
    (void)delta_col;
}

TEST_CASE("fom-sim pipeline writes outputs and a readable summary") {
    const fs::path dir = temp_dir("fomsim");
    Json t;
    t["pipeline"] = "fom-sim";
    t["output_dir"] = (dir / "run").string();
    t["model"] = {{"id", "burgers"},  {"n", 32},        {"dt", 0.002},
                  {"horizon", 0.05},  {"mu_min", 0.01}, {"mu_max", 1.0},
                  {"snapshot_stride", 5}};
    t["fom_sim"] = {{"mu", Json::array({0.1})}};

    const RunSummary s = run_experiment(config_from_json(t));
    CHECK(s.converged);
    CHECK(fs::exists(dir / "run" / "outputs.csv"));
    CHECK(fs::exists(dir / "run" / "states.bin"));
    const RunSummary back = read_summary((dir / "run").string());
    CHECK(back.pipeline == "fom-sim");
    CHECK(back.model_id == "burgers");
    CHECK(back.converged);
}

TEST_CASE("greedy pipeline run, manifest reload, and determinism") {
    const fs::path dir = temp_dir("greedy_run");
    const Json t = tiny_rd_run((dir / "a").string());

    const RunSummary s = run_experiment(config_from_json(t));
    CHECK(s.pipeline == "standard");
    CHECK(s.iterations >= 1);
    CHECK(fs::exists(dir / "a" / "iterations.csv"));
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    CHECK(fs::exists(dir / "a" / "basis.bin"));

    // The manifest alone is enough to rebuild and re-simulate the ROM.
    const ReloadedRom r = load_manifest((dir / "a").string());
    CHECK(r.fom.model_id == "reaction-diffusion");
    REQUIRE(r.basis.size() == s.l_rb);
    const ReducedModel rom = project_rom(r.fom, r.basis, r.interp);
    const RomTrajectory rt = simulate_rom(rom, Vector(0));
    CHECK(rt.stable);

    // Re-running the identical config differs only in wall-clock columns.
    Json t2 = t;
    t2["output_dir"] = (dir / "b").string();
    run_experiment(config_from_json(t2));
    CHECK(csv_without_wall(dir / "a" / "iterations.csv") ==
          csv_without_wall(dir / "b" / "iterations.csv"));
}

TEST_CASE("comparison refuses mixed models and tabulates aligned runs") {
    const fs::path dir = temp_dir("compare");
    const Json a = tiny_rd_run((dir / "a").string());
    Json b = tiny_rd_run((dir / "b").string());
    b["label"] = "tiny";  // duplicate label: columns must still be unique
    run_experiment(config_from_json(a));
    run_experiment(config_from_json(b));

    compare_runs({(dir / "a").string(), (dir / "b").string()},
                 (dir / "cmp").string());
    CHECK(fs::exists(dir / "cmp" / "comparison.csv"));
    CHECK(fs::exists(dir / "cmp" / "comparison.json"));
    CHECK(fs::exists(dir / "cmp" / "overlay.csv"));

    std::vector<std::string> header;
    const auto rows = read_csv((dir / "cmp" / "overlay.csv").string(), &header);
    CHECK(!rows.empty());
    // Two identical runs: every overlaid delta column pair agrees.
    std::ifstream in(dir / "cmp" / "overlay.csv");
    std::string h1, r1;
    std::getline(in, h1);
    CHECK(h1.find("delta_tiny") != std::string::npos);
    CHECK(h1.find("delta_tiny_2") != std::string::npos);

    // A run on a different model is refused.
    Json c;
    c["pipeline"] = "fom-sim";
    c["output_dir"] = (dir / "c").string();
    c["model"] = {{"id", "burgers"},  {"n", 32},        {"dt", 0.002},
                  {"horizon", 0.05},  {"mu_min", 0.01}, {"mu_max", 1.0},
                  {"snapshot_stride", 5}};
    run_experiment(config_from_json(c));
    CHECK_THROWS(compare_runs({(dir / "a").string(), (dir / "c").string()},
                              (dir / "cmp2").string()));
}

TEST_CASE("twoway pipeline produces a manifest sized to its final counts") {
    const fs::path dir = temp_dir("twoway");
    Json t;
    t["pipeline"] = "twoway";
    t["output_dir"] = (dir / "run").string();
    t["model"] = {{"id", "reaction-diffusion"}, {"n", 24},
                  {"dt", 0.001},     {"horizon", 0.08},
                  {"snapshot_stride", 4}};
    t["twoway"] = {{"tol", 1e-6}, {"initial_l_rb", 1}, {"initial_l_ei", 2},
                   {"max_iter", 40}};

    const RunSummary s = run_experiment(config_from_json(t));
    CHECK(s.pipeline == "twoway");
    CHECK(s.fom_simulations == 1);
    const ReloadedRom r = load_manifest((dir / "run").string());
    CHECK(r.basis.size() == s.l_rb);
    REQUIRE(r.interp.has_value());
    CHECK(r.interp->size() == s.l_ei);
}
