#include "admor/experiment.hpp"

#include "admor/error_estimation.hpp"
#include "admor/infsup.hpp"
#include "admor/matrix_io.hpp"
#include "admor/reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace admor {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Json parse_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j;
}

// Replaces {"include": "file.json", ...siblings} objects by the referenced
// file's content with the siblings merged on top of it.
Json resolve_includes(Json node, const fs::path& base, int depth) {
    if (depth > 16)
        throw std::runtime_error("config includes nested too deeply");
    if (node.is_object()) {
        if (node.contains("include")) {
            const fs::path inc_path =
                base / node.at("include").get<std::string>();
            Json loaded = resolve_includes(parse_json_file(inc_path),
                                           inc_path.parent_path(), depth + 1);
            if (!loaded.is_object())
                throw std::runtime_error("included file is not an object: " +
                                         inc_path.string());
            node.erase("include");
            for (auto& [key, value] : node.items())
                loaded[key] = resolve_includes(value, base, depth + 1);
            return loaded;
        }
        for (auto& [key, value] : node.items())
            node[key] = resolve_includes(value, base, depth + 1);
        return node;
    }
    if (node.is_array()) {
        for (auto& value : node)
            value = resolve_includes(value, base, depth + 1);
    }
    return node;
}

double get_num(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Index get_int(const Json& j, const char* key, Index fallback) {
    return j.contains(key) ? j.at(key).get<Index>() : fallback;
}

std::string get_str(const Json& j, const char* key,
                    const std::string& fallback) {
    return j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

// JSON cannot hold non-finite numbers; they round-trip as strings.
Json json_double(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double double_from(const Json& j, double fallback) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    return fallback;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Vector vector_from(const Json& arr) {
    Vector v(arr.size());
    Index i = 0;
    for (const auto& x : arr) v[i++] = x.get<double>();
    return v;
}

Json json_from(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

InterpMethod parse_method(const std::string& name) {
    if (name == "eim") return InterpMethod::eim;
    if (name == "deim") return InterpMethod::deim;
    throw std::runtime_error("unknown interpolation method: " + name);
}

IndicatorMode parse_mode(const std::string& name) {
    if (name == "original") return IndicatorMode::original;
    if (name == "modified") return IndicatorMode::modified;
    throw std::runtime_error("unknown indicator mode: " + name);
}

const char* method_name(InterpMethod m) {
    return m == InterpMethod::eim ? "eim" : "deim";
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    const fs::path p(path);
    ExperimentConfig cfg;
    cfg.source_dir = p.has_parent_path() ? p.parent_path().string() : ".";
    cfg.tree = resolve_includes(parse_json_file(p), p.parent_path(), 0);
    return cfg;
}

ExperimentConfig config_from_json(Json tree, std::string source_dir) {
    ExperimentConfig cfg;
    cfg.tree = resolve_includes(std::move(tree), source_dir, 0);
    cfg.source_dir = std::move(source_dir);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("override must look like path.to.key=value: " +
                                 key_eq_value);
    const std::string path = key_eq_value.substr(0, eq);
    const std::string raw = key_eq_value.substr(eq + 1);

    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    Json* node = &cfg.tree;
    std::istringstream keys(path);
    std::string key, next;
    std::getline(keys, key, '.');
    while (std::getline(keys, next, '.')) {
        node = &(*node)[key];
        if (!node->is_object()) *node = Json::object();
        key = next;
    }
    (*node)[key] = value;
}

SemiImplicitFom build_model(const Json& model) {
    const std::string id = model.at("id").get<std::string>();
    if (id == "burgers") {
        return make_burgers_fom(get_int(model, "n", 500),
                                get_num(model, "dt", 4e-4),
                                get_num(model, "horizon", 2.0),
                                get_num(model, "mu_min", 5e-4),
                                get_num(model, "mu_max", 1.0),
                                get_int(model, "snapshot_stride", 10));
    }
    if (id == "chromatography") {
        ChromatographyCoefficients c;
        if (model.contains("coefficients")) {
            const Json& cj = model.at("coefficients");
            c.porosity = get_num(cj, "porosity", c.porosity);
            c.peclet = get_num(cj, "peclet", c.peclet);
            c.column_length = get_num(cj, "column_length", c.column_length);
            c.cross_section = get_num(cj, "cross_section", c.cross_section);
            c.kappa_a = get_num(cj, "kappa_a", c.kappa_a);
            c.kappa_b = get_num(cj, "kappa_b", c.kappa_b);
            c.henry_a1 = get_num(cj, "henry_a1", c.henry_a1);
            c.henry_a2 = get_num(cj, "henry_a2", c.henry_a2);
            c.henry_b1 = get_num(cj, "henry_b1", c.henry_b1);
            c.henry_b2 = get_num(cj, "henry_b2", c.henry_b2);
            c.k_a1 = get_num(cj, "k_a1", c.k_a1);
            c.k_a2 = get_num(cj, "k_a2", c.k_a2);
            c.k_b1 = get_num(cj, "k_b1", c.k_b1);
            c.k_b2 = get_num(cj, "k_b2", c.k_b2);
            c.feed_a = get_num(cj, "feed_a", c.feed_a);
            c.feed_b = get_num(cj, "feed_b", c.feed_b);
            c.horizon_const = get_num(cj, "horizon_const", c.horizon_const);
        }
        return make_chromatography_fom(get_int(model, "n", 1000),
                                       get_num(model, "dt", 2e-3), c,
                                       get_int(model, "snapshot_stride", 20));
    }
    if (id == "reaction-diffusion") {
        return make_reaction_diffusion_fom(get_int(model, "n", 60),
                                           get_num(model, "dt", 1e-3),
                                           get_num(model, "horizon", 0.5),
                                           get_int(model, "snapshot_stride",
                                                   10));
    }
    throw std::runtime_error("unknown model id: " + id);
}

TrainingSet build_training_set(const Json& training,
                               const SemiImplicitFom& fom) {
    const std::string kind = training.at("kind").get<std::string>();
    TrainingSet xi;
    if (kind == "log-uniform") {
        if (fom.domain.dim() != 1)
            throw std::runtime_error(
                "log-uniform training needs a 1-d parameter domain");
        xi = log_uniform_points_1d(
            get_num(training, "lo", fom.domain.lo[0]),
            get_num(training, "hi", fom.domain.hi[0]),
            training.at("count").get<Index>());
    } else if (kind == "grid") {
        if (fom.domain.dim() != 2)
            throw std::runtime_error(
                "grid training needs a 2-d parameter domain");
        xi = uniform_grid_2d(fom.domain, training.at("n0").get<Index>(),
                             training.at("n1").get<Index>());
    } else if (kind == "list") {
        for (const auto& p : training.at("points"))
            xi.push_back(vector_from(p));
    } else {
        throw std::runtime_error("unknown training kind: " + kind);
    }
    for (const Vector& mu : xi)
        if (fom.domain.dim() > 0 && !fom.domain.contains(mu))
            throw std::runtime_error(
                "training point outside the model's parameter domain");
    return xi;
}

GreedyConfig parse_greedy_config(const Json& g) {
    GreedyConfig cfg;
    cfg.tol = get_num(g, "tol", cfg.tol);
    cfg.tol_ei_factor = get_num(g, "tol_ei_factor", cfg.tol_ei_factor);
    cfg.zoa_lower_factor = get_num(g, "zoa_lower_factor", cfg.zoa_lower_factor);
    cfg.max_iter = get_int(g, "max_iter", cfg.max_iter);
    cfg.eps_pod = get_num(g, "eps_pod", cfg.eps_pod);
    cfg.eps_ei = get_num(g, "eps_ei", cfg.eps_ei);
    cfg.method = parse_method(get_str(g, "method", "eim"));
    cfg.mode = parse_mode(get_str(g, "mode", "modified"));
    cfg.initial_l_rb = get_int(g, "initial_l_rb", cfg.initial_l_rb);
    cfg.initial_l_ei = get_int(g, "initial_l_ei", cfg.initial_l_ei);
    cfg.seed = static_cast<unsigned>(get_int(g, "seed", 0));
    cfg.fine_margin = get_int(g, "fine_margin", cfg.fine_margin);
    cfg.dual_tol_factor = get_num(g, "dual_tol_factor", cfg.dual_tol_factor);
    cfg.adss_angle_tol = get_num(g, "adss_angle_tol", cfg.adss_angle_tol);
    cfg.gmres_tol = get_num(g, "gmres_tol", cfg.gmres_tol);
    cfg.ilu_drop_tol = get_num(g, "ilu_drop_tol", cfg.ilu_drop_tol);
    cfg.infsup_n_coarse = get_int(g, "infsup_n_coarse", cfg.infsup_n_coarse);
    cfg.infsup_tol_change =
        get_num(g, "infsup_tol_change", cfg.infsup_tol_change);
    cfg.infsup_max_centers =
        get_int(g, "infsup_max_centers", cfg.infsup_max_centers);
    cfg.jobs = get_int(g, "jobs", cfg.jobs);
    return cfg;
}

std::vector<std::string> iteration_csv_header(Index param_dim) {
    std::vector<std::string> h{"iteration"};
    for (Index a = 0; a < param_dim; ++a)
        h.push_back("mu_" + std::to_string(a));
    for (const char* name :
         {"l_rb", "l_ei", "l_rb_increment", "delta_rb", "delta_i", "delta",
          "delta_max", "true_error", "rho", "eff_original", "eff_modified",
          "wall_seconds"})
        h.push_back(name);
    return h;
}

void write_iteration_csv(const std::string& path,
                         const std::vector<IterationRecord>& history,
                         Index param_dim) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const auto header = iteration_csv_header(param_dim);
    for (size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const IterationRecord& r : history) {
        out << r.iteration;
        for (Index a = 0; a < param_dim; ++a)
            out << "," << format_double(a < r.mu_star.size() ? r.mu_star[a]
                                                             : 0.0);
        out << "," << r.l_rb << "," << r.l_ei << "," << r.l_rb_increment;
        for (double x : {r.delta_rb, r.delta_i, r.delta, r.delta_max,
                         r.true_error, r.rho, r.eff_original, r.eff_modified,
                         r.wall_seconds})
            out << "," << format_double(x);
        out << "\n";
    }
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV: " + path);
    if (header) {
        header->clear();
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            // strtod instead of stod: subnormal cells must not throw.
            row.push_back(cell.empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : std::strtod(cell.c_str(), nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

void write_summary_json(const fs::path& dir, const RunSummary& s,
                        const Json& extra) {
    Json j;
    j["schema_version"] = 1;
    j["pipeline"] = s.pipeline;
    j["model_id"] = s.model_id;
    j["label"] = s.label;
    j["iterations"] = s.iterations;
    j["l_rb"] = s.l_rb;
    j["l_ei"] = s.l_ei;
    j["termination"] = s.termination;
    j["fom_simulations"] = s.fom_simulations;
    j["setup_seconds"] = json_double(s.setup_seconds);
    j["total_seconds"] = json_double(s.total_seconds);
    j["final_delta"] = json_double(s.final_delta);
    j["max_true_error"] = json_double(s.max_true_error);
    j["converged"] = s.converged;
    j["files"] = s.files;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    std::ofstream out(dir / "summary.json");
    out << j.dump(2) << "\n";
}

// Serialized final ROM: enough to rebuild the model, the bases, and the
// interpolation operator without re-running any pipeline.
void write_manifest(const fs::path& dir, const Json& model,
                    const std::string& pipeline, const ReducedBasis& basis,
                    const std::optional<InterpBasis>& interp,
                    const Matrix& v_du,
                    const std::optional<InfSupSurrogate>& infsup,
                    RunSummary& summary) {
    Json m;
    m["schema_version"] = 1;
    m["model"] = model;
    m["pipeline"] = pipeline;
    m["l_rb"] = basis.size();
    m["l_ei"] = interp ? interp->size() : 0;
    write_matrix(dir / "basis.bin", basis.V);
    m["files"]["basis"] = "basis.bin";
    summary.files["basis"] = "basis.bin";
    if (interp) {
        write_matrix(dir / "interp_u.bin", interp->U);
        m["files"]["interp_u"] = "interp_u.bin";
        m["interp_method"] = method_name(interp->method);
        m["interp_indices"] = interp->indices;
        summary.files["interp_u"] = "interp_u.bin";
    } else {
        m["interp_method"] = "none";
    }
    if (v_du.cols() > 0) {
        write_matrix(dir / "v_du.bin", v_du);
        m["files"]["v_du"] = "v_du.bin";
        summary.files["v_du"] = "v_du.bin";
    }
    if (infsup) {
        Json s;
        s["kernel"] = infsup->kernel;
        s["values"] = json_from(infsup->values);
        s["weights"] = json_from(infsup->weights);
        s["scale_lo"] = json_from(infsup->scale_lo);
        s["scale_hi"] = json_from(infsup->scale_hi);
        Json centers = Json::array();
        for (const Vector& c : infsup->centers) centers.push_back(json_from(c));
        s["centers"] = centers;
        m["infsup"] = s;
    }
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << "\n";
    summary.files["manifest"] = "manifest.json";
}

double max_true_error_of(const std::vector<IterationRecord>& history) {
    double worst = -1.0;
    for (const IterationRecord& r : history)
        if (std::isfinite(r.true_error))
            worst = std::max(worst, r.true_error);
    return worst;
}

RunSummary run_fom_sim(const ExperimentConfig& cfg, const SemiImplicitFom& fom,
                       const fs::path& dir, RunSummary summary) {
    const Json block = cfg.tree.value("fom_sim", Json::object());
    const Vector mu = block.contains("mu") ? vector_from(block.at("mu"))
                                           : (fom.domain.dim() > 0
                                                  ? Vector(fom.domain.lo)
                                                  : Vector(0));
    const auto t0 = Clock::now();
    const Trajectory traj = simulate_fom(fom, mu);
    summary.total_seconds = seconds_since(t0);

    write_matrix(dir / "states.bin", traj.states);
    write_matrix(dir / "f_snapshots.bin", traj.f_snapshots);
    summary.files["states"] = "states.bin";
    summary.files["f_snapshots"] = "f_snapshots.bin";

    std::ofstream out(dir / "outputs.csv");
    out << "step,t";
    for (Index i = 0; i < fom.n_outputs; ++i) out << ",y_" << i;
    out << "\n";
    for (Index k = 0; k < traj.outputs.cols(); ++k) {
        out << k << "," << format_double(k * fom.dt);
        for (Index i = 0; i < fom.n_outputs; ++i)
            out << "," << format_double(traj.outputs(i, k));
        out << "\n";
    }
    summary.files["outputs"] = "outputs.csv";
    summary.converged = true;
    summary.termination = "completed";
    summary.fom_simulations = 1;

    Json extra;
    extra["mu"] = json_from(mu);
    extra["snapshot_count"] = traj.states.cols();
    write_summary_json(dir, summary, extra);
    return summary;
}

RunSummary run_infsup_validate(const ExperimentConfig& cfg,
                               const SemiImplicitFom& fom, const fs::path& dir,
                               RunSummary summary) {
    const TrainingSet xi = build_training_set(cfg.tree.at("training"), fom);
    const Json g = cfg.tree.value("greedy", Json::object());

    const auto t_direct = Clock::now();
    Vector direct(xi.size());
    for (size_t j = 0; j < xi.size(); ++j)
        direct[static_cast<Index>(j)] =
            smallest_singular_value(fom.E(xi[j]));
    const double direct_seconds = seconds_since(t_direct);

    const auto t_build = Clock::now();
    const InfSupSurrogate surrogate = build_infsup_surrogate(
        xi, fom.E, get_int(g, "infsup_n_coarse", 0),
        get_num(g, "infsup_tol_change", 1e-2),
        get_int(g, "infsup_max_centers", 40));
    const double build_seconds = seconds_since(t_build);

    const auto t_sweep = Clock::now();
    Vector approx(xi.size());
    for (size_t j = 0; j < xi.size(); ++j)
        approx[static_cast<Index>(j)] = surrogate.eval(xi[j]);
    const double sweep_seconds = seconds_since(t_sweep);

    double max_rel = 0.0;
    std::ofstream out(dir / "infsup.csv");
    const Index d = fom.domain.dim();
    for (Index a = 0; a < d; ++a) out << "mu_" << a << ",";
    out << "direct,surrogate,rel_error\n";
    for (size_t j = 0; j < xi.size(); ++j) {
        const Index jj = static_cast<Index>(j);
        const double rel = std::abs(approx[jj] - direct[jj]) / direct[jj];
        max_rel = std::max(max_rel, rel);
        for (Index a = 0; a < d; ++a) out << format_double(xi[j][a]) << ",";
        out << format_double(direct[jj]) << "," << format_double(approx[jj])
            << "," << format_double(rel) << "\n";
    }
    summary.files["infsup"] = "infsup.csv";
    summary.converged = true;
    summary.termination = "completed";
    summary.setup_seconds = build_seconds;
    summary.total_seconds = direct_seconds + build_seconds + sweep_seconds;

    Json extra;
    extra["max_rel_error"] = max_rel;
    extra["centers"] = static_cast<Index>(surrogate.centers.size());
    extra["hit_max_centers"] = surrogate.hit_max_centers;
    extra["direct_seconds"] = direct_seconds;
    extra["build_seconds"] = build_seconds;
    extra["sweep_seconds"] = sweep_seconds;
    extra["speedup"] =
        sweep_seconds > 0.0 ? direct_seconds / sweep_seconds : 0.0;
    write_summary_json(dir, summary, extra);
    return summary;
}

RunSummary run_twoway(const ExperimentConfig& cfg, const SemiImplicitFom& fom,
                      const Json& model, const fs::path& dir,
                      RunSummary summary) {
    const Json tw = cfg.tree.value("twoway", Json::object());
    TwoWayConfig twc;
    twc.tol = get_num(tw, "tol", twc.tol);
    twc.zoa_lower_factor = get_num(tw, "zoa_lower_factor",
                                   twc.zoa_lower_factor);
    twc.max_iter = get_int(tw, "max_iter", twc.max_iter);
    twc.initial_l_rb = get_int(tw, "initial_l_rb", twc.initial_l_rb);
    twc.initial_l_ei = get_int(tw, "initial_l_ei", twc.initial_l_ei);
    twc.mode = parse_mode(get_str(tw, "mode", "modified"));
    twc.fine_margin = get_int(tw, "fine_margin", twc.fine_margin);
    twc.gmres_tol = get_num(tw, "gmres_tol", twc.gmres_tol);
    twc.ilu_drop_tol = get_num(tw, "ilu_drop_tol", twc.ilu_drop_tol);
    const InterpMethod method = parse_method(get_str(tw, "method", "deim"));
    const double eps_pod = get_num(tw, "eps_pod", 1e-10);
    const double eps_ei = get_num(tw, "eps_ei", 1e-10);

    const Vector mu = tw.contains("mu")
                          ? vector_from(tw.at("mu"))
                          : (fom.domain.dim() > 0 ? Vector(fom.domain.lo)
                                                  : Vector(0));
    const auto t0 = Clock::now();
    const Trajectory traj = simulate_fom(fom, mu);
    const ReducedBasis basis_full = pod(traj.states, SvdRule::by_energy(eps_pod));
    const InterpBasis interp_full =
        update_ei(traj.f_snapshots,
                  std::min<Index>(fom.n, traj.f_snapshots.cols()), method,
                  eps_ei);
    summary.setup_seconds = seconds_since(t0);

    const TwoWayResult result =
        adaptive_pod_deim_twoway(fom, traj, basis_full, interp_full, twc);
    summary.total_seconds = seconds_since(t0);

    summary.iterations = static_cast<Index>(result.history.size());
    summary.l_rb = result.l_rb;
    summary.l_ei = result.l_ei;
    summary.termination = to_string(result.cause);
    summary.converged = result.cause == TerminationCause::zoa;
    summary.fom_simulations = 1;
    if (!result.history.empty())
        summary.final_delta = result.history.back().delta;
    summary.max_true_error = max_true_error_of(result.history);

    write_iteration_csv((dir / "iterations.csv").string(), result.history,
                        fom.domain.dim());
    summary.files["iterations"] = "iterations.csv";

    ReducedBasis final_basis;
    final_basis.V = basis_full.V.leftCols(result.l_rb);
    write_manifest(dir, model, summary.pipeline, final_basis,
                   interp_full.truncated(result.l_ei), Matrix(), std::nullopt,
                   summary);

    Json extra;
    extra["initial_l_rb"] = twc.initial_l_rb;
    extra["initial_l_ei"] = twc.initial_l_ei;
    extra["conservative_l_rb"] = basis_full.size();
    extra["conservative_l_ei"] = interp_full.size();
    extra["mu"] = json_from(mu);
    write_summary_json(dir, summary, extra);
    return summary;
}

RunSummary run_greedy_pipeline(const ExperimentConfig& cfg,
                               const SemiImplicitFom& fom, const Json& model,
                               const fs::path& dir, RunSummary summary) {
    const TrainingSet xi = build_training_set(cfg.tree.at("training"), fom);
    const GreedyConfig gcfg =
        parse_greedy_config(cfg.tree.value("greedy", Json::object()));

    GreedyState state;
    if (summary.pipeline == "standard")
        state = pod_greedy_standard(fom, xi, gcfg);
    else if (summary.pipeline == "standard-deim")
        state = pod_greedy_deim_standard(fom, xi, gcfg);
    else
        state = adaptive_pod_greedy_deim(fom, xi, gcfg);

    summary.iterations = static_cast<Index>(state.history.size());
    summary.l_rb = state.basis.size();
    summary.l_ei = state.interp ? state.interp->size() : 0;
    summary.termination = to_string(state.cause);
    summary.converged = summary.pipeline == "adaptive-greedy"
                            ? state.cause == TerminationCause::zoa
                            : state.cause == TerminationCause::tol;
    summary.fom_simulations = state.fom_simulations;
    summary.setup_seconds = state.setup_seconds;
    summary.total_seconds = state.total_seconds;
    if (!state.history.empty())
        summary.final_delta = state.history.back().delta;
    summary.max_true_error = max_true_error_of(state.history);

    write_iteration_csv((dir / "iterations.csv").string(), state.history,
                        fom.domain.dim());
    summary.files["iterations"] = "iterations.csv";
    write_manifest(dir, model, summary.pipeline, state.basis, state.interp,
                   state.V_du, state.infsup, summary);

    Json extra;
    extra["selected"] = state.selected;
    write_summary_json(dir, summary, extra);
    return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
    const Json& t = cfg.tree;
    if (!t.contains("pipeline"))
        throw std::runtime_error("config is missing 'pipeline'");
    if (!t.contains("model"))
        throw std::runtime_error("config is missing 'model'");
    if (!t.contains("output_dir"))
        throw std::runtime_error("config is missing 'output_dir'");

    const std::string pipeline = t.at("pipeline").get<std::string>();
    const fs::path dir(t.at("output_dir").get<std::string>());
    fs::create_directories(dir);

    const Json& model = t.at("model");
    const SemiImplicitFom fom = build_model(model);

    RunSummary summary;
    summary.pipeline = pipeline;
    summary.model_id = fom.model_id;
    summary.label = get_str(t, "label", dir.filename().string());
    summary.output_dir = dir.string();

    if (pipeline == "fom-sim") return run_fom_sim(cfg, fom, dir, summary);
    if (pipeline == "infsup-validate")
        return run_infsup_validate(cfg, fom, dir, summary);
    if (pipeline == "twoway") return run_twoway(cfg, fom, model, dir, summary);
    if (pipeline == "standard" || pipeline == "standard-deim" ||
        pipeline == "adaptive-greedy")
        return run_greedy_pipeline(cfg, fom, model, dir, summary);
    throw std::runtime_error("unknown pipeline: " + pipeline);
}

RunSummary read_summary(const std::string& run_dir) {
    const fs::path dir(run_dir);
    const Json j = parse_json_file(dir / "summary.json");
    RunSummary s;
    s.pipeline = j.at("pipeline").get<std::string>();
    s.model_id = j.at("model_id").get<std::string>();
    s.label = j.at("label").get<std::string>();
    s.iterations = j.at("iterations").get<Index>();
    s.l_rb = j.at("l_rb").get<Index>();
    s.l_ei = j.at("l_ei").get<Index>();
    s.termination = j.at("termination").get<std::string>();
    s.fom_simulations = j.at("fom_simulations").get<Index>();
    s.setup_seconds = double_from(j.at("setup_seconds"), 0.0);
    s.total_seconds = double_from(j.at("total_seconds"), 0.0);
    s.final_delta = double_from(j.at("final_delta"), -1.0);
    s.max_true_error = double_from(j.at("max_true_error"), -1.0);
    s.converged = j.at("converged").get<bool>();
    s.output_dir = dir.string();
    if (j.contains("files"))
        for (const auto& [key, value] : j.at("files").items())
            s.files[key] = value.get<std::string>();
    return s;
}

ReloadedRom load_manifest(const std::string& run_dir) {
    const fs::path dir(run_dir);
    const Json m = parse_json_file(dir / "manifest.json");
    ReloadedRom r;
    r.fom = build_model(m.at("model"));
    r.basis.V = read_matrix(dir / m.at("files").at("basis").get<std::string>());
    const std::string method = m.at("interp_method").get<std::string>();
    if (method != "none") {
        const Matrix U = read_matrix(
            dir / m.at("files").at("interp_u").get<std::string>());
        std::vector<Index> indices =
            m.at("interp_indices").get<std::vector<Index>>();
        r.interp = finalize_interp_basis(U, std::move(indices),
                                         parse_method(method));
    }
    if (m.contains("files") && m.at("files").contains("v_du"))
        r.V_du =
            read_matrix(dir / m.at("files").at("v_du").get<std::string>());
    return r;
}

void compare_runs(const std::vector<std::string>& run_dirs,
                  const std::string& out_dir) {
    if (run_dirs.size() < 2)
        throw std::runtime_error("compare needs at least two runs");
    std::vector<RunSummary> runs;
    for (const std::string& d : run_dirs) runs.push_back(read_summary(d));
    for (const RunSummary& r : runs)
        if (r.model_id != runs[0].model_id)
            throw std::runtime_error(
                "refusing to compare runs of different models: " +
                runs[0].model_id + " vs " + r.model_id);

    // Unique column labels, preserving the run order.
    std::vector<std::string> labels;
    for (const RunSummary& r : runs) {
        std::string label = r.label;
        int k = 2;
        while (std::find(labels.begin(), labels.end(), label) != labels.end())
            label = r.label + "_" + std::to_string(k++);
        labels.push_back(label);
    }

    const fs::path dir(out_dir);
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "comparison.csv");
        out << "label,pipeline,iterations,l_rb,l_ei,termination,"
               "fom_simulations,setup_seconds,total_seconds,final_delta,"
               "max_true_error\n";
        for (size_t i = 0; i < runs.size(); ++i) {
            const RunSummary& r = runs[i];
            out << labels[i] << "," << r.pipeline << "," << r.iterations << ","
                << r.l_rb << "," << r.l_ei << "," << r.termination << ","
                << r.fom_simulations << "," << format_double(r.setup_seconds)
                << "," << format_double(r.total_seconds) << ","
                << format_double(r.final_delta) << ","
                << format_double(r.max_true_error) << "\n";
        }
    }
    {
        Json j;
        j["schema_version"] = 1;
        j["model_id"] = runs[0].model_id;
        Json arr = Json::array();
        for (size_t i = 0; i < runs.size(); ++i) {
            Json r;
            r["label"] = labels[i];
            r["pipeline"] = runs[i].pipeline;
            r["iterations"] = runs[i].iterations;
            r["l_rb"] = runs[i].l_rb;
            r["l_ei"] = runs[i].l_ei;
            r["termination"] = runs[i].termination;
            r["fom_simulations"] = runs[i].fom_simulations;
            r["setup_seconds"] = json_double(runs[i].setup_seconds);
            r["total_seconds"] = json_double(runs[i].total_seconds);
            r["final_delta"] = json_double(runs[i].final_delta);
            r["max_true_error"] = json_double(runs[i].max_true_error);
            arr.push_back(r);
        }
        j["runs"] = arr;
        std::ofstream out(dir / "comparison.json");
        out << j.dump(2) << "\n";
    }

    // Per-iteration overlay for convergence plots; runs of different lengths
    // leave trailing cells empty.
    std::vector<std::vector<std::vector<double>>> tables;
    std::vector<std::vector<std::string>> headers;
    size_t max_rows = 0;
    for (const RunSummary& r : runs) {
        std::vector<std::string> header;
        const auto it = r.files.find("iterations");
        if (it == r.files.end())
            throw std::runtime_error("run has no iteration log: " + r.label);
        tables.push_back(
            read_csv((fs::path(r.output_dir) / it->second).string(),
                     &header));
        headers.push_back(std::move(header));
        max_rows = std::max(max_rows, tables.back().size());
    }
    const std::vector<std::string> overlay_cols{
        "l_rb", "l_ei", "delta", "true_error", "eff_original",
        "eff_modified"};
    std::ofstream out(dir / "overlay.csv");
    out << "iteration";
    for (size_t i = 0; i < runs.size(); ++i)
        for (const std::string& c : overlay_cols)
            out << "," << c << "_" << labels[i];
    out << "\n";
    for (size_t row = 0; row < max_rows; ++row) {
        out << row + 1;
        for (size_t i = 0; i < runs.size(); ++i) {
            for (const std::string& c : overlay_cols) {
                out << ",";
                if (row >= tables[i].size()) continue;
                const auto pos =
                    std::find(headers[i].begin(), headers[i].end(), c);
                if (pos == headers[i].end()) continue;
                const size_t col = pos - headers[i].begin();
                if (col < tables[i][row].size())
                    out << format_double(tables[i][row][col]);
            }
        }
        out << "\n";
    }
}

}  // namespace admor
