#include "admor/greedy.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace admor {

const char* to_string(TerminationCause cause) {
    switch (cause) {
        case TerminationCause::zoa:
            return "zoa";
        case TerminationCause::tol:
            return "tol";
        case TerminationCause::max_iter:
            return "max_iter";
        case TerminationCause::stagnation:
            return "stagnation";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate(const GreedyConfig& cfg, const TrainingSet& xi) {
    if (xi.empty()) throw std::invalid_argument("empty training set");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!(cfg.zoa_lower_factor > 0.0 && cfg.zoa_lower_factor < 1.0))
        throw std::invalid_argument("zoa_lower_factor must lie in (0, 1)");
    if (!(cfg.tol_ei_factor > 0.0))
        throw std::invalid_argument("tol_ei_factor must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (cfg.initial_l_rb < 1 || cfg.initial_l_ei < 1)
        throw std::invalid_argument("initial basis sizes must be >= 1");
    if (cfg.fine_margin < 0)
        throw std::invalid_argument("fine_margin must be >= 0");
}

Index pick_initial_index(unsigned seed, Index n) {
    if (seed == 0) return 0;
    std::mt19937 rng(seed);
    return std::uniform_int_distribution<Index>(0, n - 1)(rng);
}

struct SigmaProvider {
    double fixed = 0.0;
    const InfSupSurrogate* surrogate = nullptr;

    double at(const Vector& mu) const {
        return surrogate ? surrogate->eval(mu) : fixed;
    }
};

struct DualProvider {
    const DualSolution* fixed = nullptr;
    const DualReducedBasis* rb = nullptr;

    DualSolution at(const Vector& mu) const {
        return rb ? rb->evaluate(mu) : *fixed;
    }
};

Matrix deflate(const Matrix& X, const Matrix& V) {
    if (V.cols() == 0) return X;
    return X - V * (V.transpose() * X);
}

Matrix maybe_thin(const Matrix& X, double angle_tol) {
    if (angle_tol <= 0.0) return X;
    return adss_filter(X, angle_tol).thinned;
}

// Simulates and caches the FOM at training index idx; counts each distinct
// simulation exactly once.
const Trajectory& ensure_fom(GreedyState& state, const SemiImplicitFom& fom,
                             const TrainingSet& xi, Index idx) {
    auto it = state.fom_cache.find(idx);
    if (it == state.fom_cache.end()) {
        it = state.fom_cache.emplace(idx, simulate_fom(fom, xi[idx])).first;
        ++state.fom_simulations;
    }
    return it->second;
}

// Appends the POD modes of the deflated (optionally thinned) snapshots.
// Returns the number of columns actually appended.
Index grow_basis(ReducedBasis& basis, const Matrix& states, Index count,
                 Index param_idx, double adss_angle_tol) {
    const Matrix thinned = maybe_thin(states, adss_angle_tol);
    const Matrix deflated = deflate(thinned, basis.V);
    const SvdResult svd = truncated_svd(deflated, SvdRule::by_count(count));
    if (svd.left.cols() == 0) return 0;
    const Index before = basis.V.cols();
    basis.V = orth_extend(basis.V, svd.left);
    const Index added = basis.V.cols() - before;
    for (Index j = 0; j < added; ++j)
        basis.provenance.push_back({param_idx, j});
    return added;
}

void shrink_basis(ReducedBasis& basis, Index remove) {
    basis.V = Matrix(basis.V.leftCols(basis.V.cols() - remove));
    basis.provenance.resize(basis.V.cols());
}

struct SweepResult {
    std::vector<double> delta, delta_rb, delta_i;
    Index argmax = 0;
};

SweepResult indicator_sweep(const SemiImplicitFom& fom, const TrainingSet& xi,
                            const ReducedModel& rom,
                            const InterpErrorIndicator* ierr,
                            const DualProvider& dual,
                            const SigmaProvider& sigma, double rho,
                            IndicatorMode mode, Index jobs) {
    const Index n = static_cast<Index>(xi.size());
    SweepResult sw;
    sw.delta.assign(n, 0.0);
    sw.delta_rb.assign(n, 0.0);
    sw.delta_i.assign(n, 0.0);

    const auto eval_one = [&](Index j) {
        const RomTrajectory traj = simulate_rom(rom, xi[j]);
        if (!traj.stable) {
            sw.delta[j] = sw.delta_rb[j] = sw.delta_i[j] = kInf;
            return;
        }
        const ResidualSeries series =
            primal_residuals(fom, xi[j], rom, traj, ierr);
        const DualSolution d = dual.at(xi[j]);
        const ErrorReport rep =
            output_indicator(mode, series, d, rho, sigma.at(xi[j]));
        sw.delta[j] = rep.delta;
        sw.delta_rb[j] = rep.delta_rb;
        sw.delta_i[j] = rep.delta_i;
    };

    const Index workers = std::max<Index>(1, std::min(jobs, n));
    if (workers == 1) {
        for (Index j = 0; j < n; ++j) eval_one(j);
    } else {
        std::vector<std::thread> threads;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::atomic<Index> next{0};
        for (Index w = 0; w < workers; ++w) {
            threads.emplace_back([&]() {
                try {
                    for (Index j = next.fetch_add(1); j < n;
                         j = next.fetch_add(1))
                        eval_one(j);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (std::thread& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    Index best = 0;
    for (Index j = 1; j < n; ++j)
        if (sw.delta[j] > sw.delta[best]) best = j;
    sw.argmax = best;
    return sw;
}

// True errors and effectivities at a parameter whose FOM trajectory is
// known; fills the truth columns of the iteration record.
void fill_truth(IterationRecord& rec, const SemiImplicitFom& fom,
                const Vector& mu, const Trajectory& fom_traj,
                const ReducedModel& rom, const RomTrajectory& rom_traj,
                const DualSolution& dual, double sigma, double rho,
                const InterpErrorIndicator* ierr, IndicatorMode mode) {
    const ResidualSeries series = primal_residuals(fom, mu, rom, rom_traj, ierr);
    const CorrectedOutputs corr =
        corrected_outputs(fom, mu, rom, rom_traj, dual);
    const ErrorReport orig = output_indicator(IndicatorMode::original, series,
                                              dual, rho, sigma);
    const ErrorReport mod = output_indicator(IndicatorMode::modified, series,
                                             dual, rho, sigma, &corr);
    const double err_orig =
        true_mean_output_error(fom_traj, outputs_at_snapshots(rom_traj));
    const double err_mod = true_mean_output_error(fom_traj, corr.y);
    if (err_orig > 0.0) rec.eff_original = orig.delta / err_orig;
    if (err_mod > 0.0) rec.eff_modified = mod.delta / err_mod;
    rec.true_error = mode == IndicatorMode::modified ? err_mod : err_orig;
}

// Setup shared by every indicator-driven pipeline: the sigma_min source and
// the dual strategy. Returns the setup wall time spent on the surrogate.
struct IndicatorSetup {
    SigmaProvider sigma;
    std::optional<DualSolution> fixed_dual;
    std::optional<DualReducedBasis> dual_rb;
    double surrogate_seconds = 0.0;

    DualProvider dual_provider() const {
        DualProvider p;
        if (dual_rb)
            p.rb = &*dual_rb;
        else
            p.fixed = &*fixed_dual;
        return p;
    }
};

IndicatorSetup make_indicator_setup(const SemiImplicitFom& fom,
                                    const TrainingSet& xi,
                                    const GreedyConfig& cfg,
                                    GreedyState& state, Index initial_idx) {
    IndicatorSetup setup;
    if (fom.parametric_operator) {
        const auto t0 = Clock::now();
        state.infsup = build_infsup_surrogate(xi, fom.E, cfg.infsup_n_coarse,
                                              cfg.infsup_tol_change,
                                              cfg.infsup_max_centers);
        setup.surrogate_seconds = seconds_since(t0);
        setup.sigma.surrogate = &*state.infsup;
        setup.dual_rb.emplace(fom);
        setup.dual_rb->set_initial_index(initial_idx);
    } else {
        const Vector mu_rep = fom.domain.dim() > 0 ? fom.domain.lo : Vector(0);
        setup.sigma.fixed = smallest_singular_value(fom.E(mu_rep));
        setup.fixed_dual =
            dual_solve_nonparametric(fom, cfg.gmres_tol, cfg.ilu_drop_tol);
    }
    return setup;
}

// Standard POD-Greedy loop, optionally on a hyper-reduced ROM with a fixed
// interpolation basis. Assumes `state` already carries any setup artifacts.
void run_standard_loop(const SemiImplicitFom& fom, const TrainingSet& xi,
                       const GreedyConfig& cfg,
                       const std::optional<InterpBasis>& interp_coarse,
                       const InterpErrorIndicator* ierr, GreedyState& state) {
    const Index initial_idx = pick_initial_index(cfg.seed, xi.size());
    IndicatorSetup setup =
        make_indicator_setup(fom, xi, cfg, state, initial_idx);
    state.setup_seconds += setup.surrogate_seconds;
    const DualProvider dual = setup.dual_provider();

    Index mu_idx = initial_idx;
    for (Index it = 1; it <= cfg.max_iter; ++it) {
        const auto t0 = Clock::now();
        IterationRecord rec;
        rec.iteration = it;

        const Trajectory& traj = ensure_fom(state, fom, xi, mu_idx);
        if (std::find(state.selected.begin(), state.selected.end(), mu_idx) ==
            state.selected.end())
            state.selected.push_back(mu_idx);
        rec.l_rb_increment =
            grow_basis(state.basis, traj.states, 1, mu_idx,
                       cfg.adss_angle_tol);

        if (setup.dual_rb)
            setup.dual_rb->update(xi, cfg.dual_tol_factor * cfg.tol);

        const ReducedModel rom = project_rom(fom, state.basis, interp_coarse);
        rec.l_rb = state.basis.size();
        rec.l_ei = interp_coarse ? interp_coarse->size() : 0;

        double rho = 1.0;
        const RomTrajectory rom_traj = simulate_rom(rom, xi[mu_idx]);
        if (rom_traj.stable) {
            rho = rho_bar(fom, xi[mu_idx], traj, rom, rom_traj).value;
            fill_truth(rec, fom, xi[mu_idx], traj, rom, rom_traj,
                       dual.at(xi[mu_idx]), setup.sigma.at(xi[mu_idx]), rho,
                       ierr, cfg.mode);
        }
        rec.rho = rho;

        const SweepResult sw =
            indicator_sweep(fom, xi, rom, ierr, dual, setup.sigma, rho,
                            cfg.mode, cfg.jobs);
        const Index mu_next = sw.argmax;
        rec.mu_star = xi[mu_next];
        rec.delta = sw.delta[mu_next];
        rec.delta_rb = sw.delta_rb[mu_next];
        rec.delta_i = sw.delta_i[mu_next];
        rec.delta_max = rec.delta;
        rec.wall_seconds = seconds_since(t0);
        state.history.push_back(rec);

        if (rec.delta <= cfg.tol) {
            state.cause = TerminationCause::tol;
            break;
        }
        mu_idx = mu_next;
    }
    if (setup.dual_rb) state.V_du = setup.dual_rb->basis();
    state.interp = interp_coarse;
}

}  // namespace

BasisUpdate adapt_basis_update(Index l_rb, Index l_ei, double delta_rb,
                               double delta_i, double tol_rb, double tol_ei,
                               Index rank_v) {
    (void)l_rb;  // the RB count restarts from the rule each iteration
    if (!(tol_rb > 0.0) || !(tol_ei > 0.0))
        throw std::invalid_argument("tolerances must be positive");

    const auto floored_log = [](double value, double tol) {
        double ratio = value / tol;
        if (!(ratio > 0.0)) ratio = 1e-16;  // exact-zero indicator
        double lg = std::log10(ratio);
        lg = std::min(std::max(lg, -16.0), 10.0);
        const int fl = static_cast<int>(std::floor(lg));
        // Trivial update: +-1 only when the floor vanished; sign of the
        // un-floored log, counting an exact zero as growth.
        const int trivial = fl == 0 ? (lg >= 0.0 ? 1 : -1) : 0;
        return std::pair<int, int>(fl, trivial);
    };

    BasisUpdate upd;
    std::tie(upd.p, upd.p0) = floored_log(delta_rb, tol_rb);
    std::tie(upd.d, upd.d0) = floored_log(delta_i, tol_ei);

    upd.l_rb_next = std::max<Index>(upd.p0 + upd.p, -3);
    const Index d_step = std::max<Index>(upd.d0 + upd.d, -3);
    upd.l_ei_next = std::max<Index>(l_ei + d_step, 1);
    const Index stability_floor = rank_v + std::max<Index>(upd.l_rb_next, 0);
    if (upd.l_ei_next <= stability_floor) upd.l_ei_next = stability_floor + 1;
    return upd;
}

GreedyState pod_greedy_standard(const SemiImplicitFom& fom,
                                const TrainingSet& xi,
                                const GreedyConfig& cfg) {
    validate(cfg, xi);
    const auto t0 = Clock::now();
    GreedyState state;
    run_standard_loop(fom, xi, cfg, std::nullopt, nullptr, state);
    state.total_seconds = seconds_since(t0);
    return state;
}

GreedyState pod_greedy_deim_standard(const SemiImplicitFom& fom,
                                     const TrainingSet& xi,
                                     const GreedyConfig& cfg) {
    validate(cfg, xi);
    const auto t0 = Clock::now();
    GreedyState state;

    // Interpolation-basis precompute: the nonlinearity is sampled at every
    // training parameter, which is the dominant offline cost this pipeline
    // is charged for.
    Index pool_cols = 0;
    std::vector<Matrix> blocks;
    blocks.reserve(xi.size());
    for (Index j = 0; j < static_cast<Index>(xi.size()); ++j) {
        const Trajectory& traj = ensure_fom(state, fom, xi, j);
        blocks.push_back(maybe_thin(traj.f_snapshots, cfg.adss_angle_tol));
        pool_cols += blocks.back().cols();
    }
    Matrix pool(fom.n, pool_cols);
    Index at = 0;
    for (const Matrix& b : blocks) {
        pool.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    blocks.clear();

    InterpBasis coarse =
        cfg.method == InterpMethod::eim
            ? eim_build(pool, std::min<Index>(fom.n, pool.cols()), cfg.eps_ei)
            : deim_build(pool, SvdRule::by_energy(cfg.eps_pod));
    // The split indicator needs a strictly finer basis; both builders are
    // deterministic and nested, so rebuilding with a larger count extends
    // the same basis.
    const Index fine_size =
        std::min<Index>(coarse.size() + cfg.fine_margin,
                        std::min<Index>(fom.n, pool.cols()));
    std::optional<InterpBasis> fine;
    if (fine_size > coarse.size())
        fine = cfg.method == InterpMethod::eim
                   ? eim_build(pool, fine_size, 0.0)
                   : deim_build(pool, SvdRule::by_count(fine_size));
    pool.resize(0, 0);

    std::optional<InterpErrorIndicator> ierr;
    if (fine) ierr.emplace(coarse, *fine);
    state.setup_seconds = seconds_since(t0);

    run_standard_loop(fom, xi, cfg, coarse, ierr ? &*ierr : nullptr, state);
    state.total_seconds = seconds_since(t0);
    return state;
}

GreedyState adaptive_pod_greedy_deim(const SemiImplicitFom& fom,
                                     const TrainingSet& xi,
                                     const GreedyConfig& cfg) {
    validate(cfg, xi);
    const auto t_all = Clock::now();
    GreedyState state;

    const Index initial_idx = pick_initial_index(cfg.seed, xi.size());
    IndicatorSetup setup =
        make_indicator_setup(fom, xi, cfg, state, initial_idx);
    state.setup_seconds = setup.surrogate_seconds;
    const DualProvider dual = setup.dual_provider();

    Index mu_idx = initial_idx;
    Index l_rb_inc = cfg.initial_l_rb;
    Index l_ei_target = cfg.initial_l_ei;

    // Nonlinear snapshot pool, in first-selection order.
    std::vector<Index> pool_order;
    std::map<Index, Matrix> pool_blocks;
    Index pool_cols = 0;
    const auto add_pool_block = [&](Index idx, const Trajectory& traj) {
        if (pool_blocks.count(idx)) return;
        Matrix block = maybe_thin(traj.f_snapshots, cfg.adss_angle_tol);
        pool_cols += block.cols();
        pool_blocks.emplace(idx, std::move(block));
        pool_order.push_back(idx);
    };

    std::optional<InterpBasis> coarse, fine;
    std::optional<InterpErrorIndicator> ierr;

    Index same_count = 0;
    Index prev_mu = -1;
    double prev_delta = kInf;

    for (Index it = 1; it <= cfg.max_iter; ++it) {
        const auto t0 = Clock::now();
        IterationRecord rec;
        rec.iteration = it;

        if (l_rb_inc < 0) {
            const Index remove =
                std::min<Index>(-l_rb_inc, state.basis.size() - 1);
            if (remove > 0) shrink_basis(state.basis, remove);
            rec.l_rb_increment = -remove;
        } else {
            const Trajectory& traj = ensure_fom(state, fom, xi, mu_idx);
            if (std::find(state.selected.begin(), state.selected.end(),
                          mu_idx) == state.selected.end())
                state.selected.push_back(mu_idx);
            add_pool_block(mu_idx, traj);
            rec.l_rb_increment = grow_basis(state.basis, traj.states,
                                            l_rb_inc, mu_idx,
                                            cfg.adss_angle_tol);
        }

        // Update_EI: rebuild the interpolation basis (plus the fine margin
        // for the split indicator) from all pooled snapshots.
        Matrix pool(fom.n, pool_cols);
        Index at = 0;
        for (Index idx : pool_order) {
            const Matrix& b = pool_blocks.at(idx);
            pool.middleCols(at, b.cols()) = b;
            at += b.cols();
        }
        const InterpBasis built = update_ei(
            pool, l_ei_target + cfg.fine_margin, cfg.method, cfg.eps_ei);
        pool.resize(0, 0);
        if (built.size() > l_ei_target) {
            coarse = built.truncated(l_ei_target);
            fine = built;
            ierr.emplace(*coarse, *fine);
        } else {
            // Pool exhausted before the margin: interpolation is as good as
            // the pool allows, so the split's interpolation term is zero.
            coarse = built;
            fine.reset();
            ierr.reset();
        }
        const Index l_ei_actual = coarse->size();

        if (setup.dual_rb)
            setup.dual_rb->update(xi, cfg.dual_tol_factor * cfg.tol);

        const ReducedModel rom = project_rom(fom, state.basis, coarse);
        rec.l_rb = state.basis.size();
        rec.l_ei = l_ei_actual;

        // rho is estimated where FOM data is free: at the current mu* (also
        // when it is a re-selected, already-cached parameter; the ROM is
        // accurate there, which is what pulls rho towards 1 near
        // convergence). A shrink step at a never-simulated argmax falls back
        // to the most recently simulated parameter.
        const Index rho_idx =
            state.fom_cache.count(mu_idx) ? mu_idx : state.selected.back();
        double rho = 1.0;
        const RomTrajectory rom_traj = simulate_rom(rom, xi[rho_idx]);
        if (rom_traj.stable) {
            rho = rho_bar(fom, xi[rho_idx], state.fom_cache.at(rho_idx), rom,
                          rom_traj)
                      .value;
            fill_truth(rec, fom, xi[rho_idx], state.fom_cache.at(rho_idx),
                       rom, rom_traj, dual.at(xi[rho_idx]),
                       setup.sigma.at(xi[rho_idx]), rho,
                       ierr ? &*ierr : nullptr, cfg.mode);
        }
        rec.rho = rho;

        const SweepResult sw =
            indicator_sweep(fom, xi, rom, ierr ? &*ierr : nullptr, dual,
                            setup.sigma, rho, cfg.mode, cfg.jobs);
        const Index mu_next = sw.argmax;
        rec.mu_star = xi[mu_next];
        rec.delta = sw.delta[mu_next];
        rec.delta_rb = sw.delta_rb[mu_next];
        rec.delta_i = sw.delta_i[mu_next];
        rec.delta_max = rec.delta;
        rec.wall_seconds = seconds_since(t0);
        state.history.push_back(rec);

        if (rec.delta >= cfg.zoa_lower() && rec.delta <= cfg.tol) {
            state.cause = TerminationCause::zoa;
            break;
        }
        if (mu_next == prev_mu && rec.delta >= prev_delta * (1.0 - 1e-12)) {
            if (++same_count >= 3) {
                state.cause = TerminationCause::stagnation;
                break;
            }
        } else {
            same_count = 0;
        }
        prev_mu = mu_next;
        prev_delta = rec.delta;

        // The adapt exponents need a finite magnitude. An unstable ROM
        // reports an infinite indicator at the argmax; the largest finite
        // sweep value is the best available stand-in, and a single growth
        // step is taken when every point is unstable.
        const auto finite_for_adapt = [](const std::vector<double>& v,
                                         double at, double floor_value) {
            if (std::isfinite(at)) return at;
            double best = 0.0;
            for (double x : v)
                if (std::isfinite(x) && x > best) best = x;
            return best > 0.0 ? best : floor_value;
        };
        const BasisUpdate upd = adapt_basis_update(
            l_rb_inc, l_ei_actual,
            finite_for_adapt(sw.delta_rb, sw.delta_rb[mu_next],
                             10.0 * cfg.tol),
            finite_for_adapt(sw.delta_i, sw.delta_i[mu_next],
                             10.0 * cfg.tol_ei()),
            cfg.tol, cfg.tol_ei(), state.basis.size());
        l_rb_inc = upd.l_rb_next;
        // Without a fine basis the interpolation term was unavailable, not
        // small; keep the achieved size instead of shrinking on it.
        l_ei_target = fine ? upd.l_ei_next
                           : std::max(upd.l_ei_next, l_ei_actual);
        mu_idx = mu_next;
    }

    if (setup.dual_rb) state.V_du = setup.dual_rb->basis();
    state.interp = coarse;
    state.total_seconds = seconds_since(t_all);
    return state;
}

TwoWayResult adaptive_pod_deim_twoway(const SemiImplicitFom& fom,
                                      const Trajectory& fom_traj,
                                      const ReducedBasis& basis_full,
                                      const InterpBasis& interp_full,
                                      const TwoWayConfig& cfg) {
    if (fom.parametric_operator)
        throw std::invalid_argument(
            "two-way adaptation requires a non-parametric operator");
    if (basis_full.size() < 1 || interp_full.size() < 2)
        throw std::invalid_argument("conservative bases are too small");
    const auto t_all = Clock::now();
    const Vector mu = fom.domain.dim() > 0 ? fom.domain.lo : Vector(0);

    const double sigma = smallest_singular_value(fom.E(mu));
    const DualSolution dual =
        dual_solve_nonparametric(fom, cfg.gmres_tol, cfg.ilu_drop_tol);

    TwoWayResult result;
    Index l_rb = std::clamp<Index>(cfg.initial_l_rb, 1, basis_full.size());
    Index l_ei = std::clamp<Index>(cfg.initial_l_ei, 2, interp_full.size());
    l_rb = std::min(l_rb, l_ei - 1);

    std::vector<std::pair<Index, Index>> visited;

    for (Index it = 1; it <= cfg.max_iter; ++it) {
        const auto t0 = Clock::now();
        IterationRecord rec;
        rec.iteration = it;
        rec.l_rb = l_rb;
        rec.l_ei = l_ei;

        ReducedBasis basis;
        basis.V = basis_full.V.leftCols(l_rb);
        const InterpBasis coarse = interp_full.truncated(l_ei);
        const Index fine_size =
            std::min<Index>(l_ei + cfg.fine_margin, interp_full.size());
        std::optional<InterpErrorIndicator> ierr;
        if (fine_size > l_ei)
            ierr.emplace(coarse, interp_full.truncated(fine_size));

        const ReducedModel rom = project_rom(fom, basis, coarse);
        const RomTrajectory rom_traj = simulate_rom(rom, mu);

        double delta_rb_val = kInf, delta_i_val = kInf;
        if (rom_traj.stable) {
            const double rho =
                rho_bar(fom, mu, fom_traj, rom, rom_traj).value;
            rec.rho = rho;
            const ResidualSeries series = primal_residuals(
                fom, mu, rom, rom_traj, ierr ? &*ierr : nullptr);
            const ErrorReport rep =
                output_indicator(cfg.mode, series, dual, rho, sigma);
            delta_rb_val = rep.delta_rb;
            delta_i_val = rep.delta_i;
            fill_truth(rec, fom, mu, fom_traj, rom, rom_traj, dual, sigma,
                       rho, ierr ? &*ierr : nullptr, cfg.mode);
        }
        rec.mu_star = mu;
        rec.delta_rb = delta_rb_val;
        rec.delta_i = delta_i_val;
        rec.delta = delta_rb_val + delta_i_val;
        rec.delta_max = rec.delta;
        rec.wall_seconds = seconds_since(t0);
        result.history.push_back(rec);

        if (rec.delta >= cfg.zoa_lower() && rec.delta <= cfg.tol) {
            result.cause = TerminationCause::zoa;
            break;
        }

        visited.emplace_back(l_rb, l_ei);

        const BasisUpdate upd =
            adapt_basis_update(l_rb, l_ei, delta_rb_val, delta_i_val, cfg.tol,
                               cfg.tol_ei(), 0);
        // Two-way: both counts accumulate, then the interpolation basis is
        // kept strictly larger than the projection basis.
        Index next_rb =
            std::clamp<Index>(l_rb + upd.l_rb_next, 1, basis_full.size());
        Index next_ei = std::max(upd.l_ei_next, next_rb + 1);
        next_ei = std::min<Index>(next_ei, interp_full.size());
        if (next_ei <= next_rb) next_rb = next_ei - 1;  // clamp collision

        l_rb = next_rb;
        l_ei = next_ei;
        if (std::find(visited.begin(), visited.end(),
                      std::make_pair(l_rb, l_ei)) != visited.end()) {
            result.cause = TerminationCause::stagnation;
            break;
        }
    }

    result.l_rb = l_rb;
    result.l_ei = l_ei;
    result.total_seconds = seconds_since(t_all);
    return result;
}

}  // namespace admor
