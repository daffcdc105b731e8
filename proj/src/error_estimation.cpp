#include "admor/error_estimation.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace admor {

namespace {

Vector representative_mu(const SemiImplicitFom& fom) {
    return fom.domain.dim() > 0 ? fom.domain.lo : Vector(0);
}

// Exact-nonlinearity residual at one snapshot instant, given preassembled
// operators: r = A x^k + dt f(x^k) + dt B u^k - E x^{k+1}.
Vector residual_full_at(const SemiImplicitFom& fom, const Vector& mu,
                        const SpMatrix& E, const SpMatrix& A,
                        const Matrix& V, const Matrix& reduced_states,
                        Index step) {
    const Vector x_prev = V * reduced_states.col(step - 1);
    const Vector x_next = V * reduced_states.col(step);
    const Vector u = fom.input((step - 1) * fom.dt, mu);
    Vector r = A * x_prev;
    r.noalias() += fom.dt * fom.f(x_prev, mu);
    r.noalias() += fom.dt * (fom.B * u);
    r.noalias() -= E * x_next;
    return r;
}

void check_snapshot_index(const RomTrajectory& traj, Index snapshot_index) {
    if (snapshot_index < 0 ||
        snapshot_index >= static_cast<Index>(traj.snapshot_steps.size()))
        throw std::invalid_argument("snapshot index out of range");
}

}  // namespace

DualSolution dual_solve_nonparametric(const SemiImplicitFom& fom,
                                      double gmres_tol, double ilu_drop_tol) {
    const SpMatrix E = fom.E(representative_mu(fom));
    SpMatrix Et = SpMatrix(E.transpose());
    Et.makeCompressed();
    const IluPreconditioner ilu = ilu_factor(Et, ilu_drop_tol);

    GmresOptions opt;
    opt.tol = gmres_tol;

    DualSolution dual;
    dual.mode = DualStrategy::nonparametric_krylov;
    dual.x_du.resize(fom.n, fom.n_outputs);
    dual.r_du_norm.resize(fom.n_outputs);
    for (Index i = 0; i < fom.n_outputs; ++i) {
        const Vector b = -fom.C.row(i).transpose();
        const IterativeSolveReport rep = gmres_solve(Et, b, opt, &ilu);
        dual.x_du.col(i) = rep.x;
        dual.r_du_norm[i] = (b - Et * rep.x).norm();
        dual.converged = dual.converged && rep.converged;
    }
    return dual;
}

bool DualReducedBasis::update(const TrainingSet& xi, double tol) {
    if (xi.empty()) throw std::invalid_argument("empty training set");
    if (mu_star_idx_ < 0 || mu_star_idx_ >= static_cast<Index>(xi.size()))
        throw std::invalid_argument("dual worst-parameter index out of range");
    if (residual_indicator(xi[mu_star_idx_]) <= tol) return false;

    SpMatrix Et = SpMatrix(fom_->E(xi[mu_star_idx_]).transpose());
    Et.makeCompressed();
    Eigen::SparseLU<SpMatrix> lu(Et);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("dual operator factorization failed");
    const Matrix X = lu.solve(Matrix(-fom_->C.transpose()));

    const Index before = V_du_.cols();
    V_du_ = orth_extend(V_du_, X);
    const bool extended = V_du_.cols() > before;

    Index best = 0;
    double best_val = -1.0;
    for (Index j = 0; j < static_cast<Index>(xi.size()); ++j) {
        const double val = residual_indicator(xi[j]);
        if (val > best_val) {
            best_val = val;
            best = j;
        }
    }
    mu_star_idx_ = best;
    return extended;
}

DualSolution DualReducedBasis::evaluate(const Vector& mu) const {
    DualSolution dual;
    dual.mode = DualStrategy::parametric_rb;
    const Index n_out = fom_->n_outputs;
    dual.r_du_norm.resize(n_out);
    if (V_du_.cols() == 0) {
        dual.x_du = Matrix::Zero(fom_->n, n_out);
        for (Index i = 0; i < n_out; ++i)
            dual.r_du_norm[i] = fom_->C.row(i).norm();
        return dual;
    }
    const SpMatrix Et = SpMatrix(fom_->E(mu).transpose());
    const Matrix Et_V = Et * V_du_;
    const Matrix E_r = V_du_.transpose() * Et_V;
    const Matrix rhs = -(fom_->C * V_du_).transpose();
    const Matrix Z = Eigen::PartialPivLU<Matrix>(E_r).solve(rhs);
    dual.x_du = V_du_ * Z;
    for (Index i = 0; i < n_out; ++i)
        dual.r_du_norm[i] =
            (-fom_->C.row(i).transpose() - Et_V * Z.col(i)).norm();
    return dual;
}

double DualReducedBasis::residual_indicator(const Vector& mu) const {
    const DualSolution dual = evaluate(mu);
    return dual.r_du_norm.maxCoeff();
}

ResidualSeries primal_residuals(const SemiImplicitFom& fom, const Vector& mu,
                                const ReducedModel& rom,
                                const RomTrajectory& traj,
                                const InterpErrorIndicator* interp_err) {
    if (interp_err) {
        if (!rom.interp)
            throw std::invalid_argument(
                "interpolation error indicator given for a plain Galerkin "
                "ROM");
        if (interp_err->coarse().indices != rom.interp->indices)
            throw std::invalid_argument(
                "interpolation error indicator does not match the ROM's "
                "interpolation basis");
    }

    const SpMatrix E = fom.E(mu);
    const SpMatrix A = fom.A(mu);
    const Index K = static_cast<Index>(traj.snapshot_steps.size());

    ResidualSeries series;
    series.r_rb_norm.resize(K);
    series.delta_i_norm.assign(K, 0.0);
    for (Index i = 0; i < K; ++i) {
        const Index step = traj.snapshot_steps[i];
        const Vector x_prev = rom.V * traj.reduced_states.col(step - 1);
        const Vector x_next = rom.V * traj.reduced_states.col(step);
        const Vector u = fom.input((step - 1) * fom.dt, mu);

        Vector f_interp;
        if (rom.interp) {
            if (interp_err) {
                const Vector f_samples =
                    fom.f_rows(x_prev, mu, interp_err->sample_indices());
                f_interp = rom.interp->lift(f_samples.head(rom.interp->size()));
                series.delta_i_norm[i] = interp_err->delta_norm(f_samples);
            } else {
                f_interp =
                    rom.interp->lift(fom.f_rows(x_prev, mu,
                                                rom.interp->indices));
            }
        } else {
            f_interp = fom.f(x_prev, mu);
        }

        Vector r = A * x_prev;
        r.noalias() += fom.dt * f_interp;
        r.noalias() += fom.dt * (fom.B * u);
        r.noalias() -= E * x_next;
        series.r_rb_norm[i] = r.norm();
    }
    return series;
}

Vector primal_residual_full(const SemiImplicitFom& fom, const Vector& mu,
                            const ReducedModel& rom, const RomTrajectory& traj,
                            Index snapshot_index) {
    check_snapshot_index(traj, snapshot_index);
    return residual_full_at(fom, mu, fom.E(mu), fom.A(mu), rom.V,
                            traj.reduced_states,
                            traj.snapshot_steps[snapshot_index]);
}

Vector primal_residual_interp(const SemiImplicitFom& fom, const Vector& mu,
                              const ReducedModel& rom,
                              const RomTrajectory& traj,
                              Index snapshot_index) {
    check_snapshot_index(traj, snapshot_index);
    const Index step = traj.snapshot_steps[snapshot_index];
    const Vector x_prev = rom.V * traj.reduced_states.col(step - 1);
    const Vector x_next = rom.V * traj.reduced_states.col(step);
    const Vector u = fom.input((step - 1) * fom.dt, mu);

    const Vector f_interp =
        rom.interp
            ? Vector(rom.interp->lift(
                  fom.f_rows(x_prev, mu, rom.interp->indices)))
            : fom.f(x_prev, mu);

    Vector r = fom.A(mu) * x_prev;
    r.noalias() += fom.dt * f_interp;
    r.noalias() += fom.dt * (fom.B * u);
    r.noalias() -= fom.E(mu) * x_next;
    return r;
}

RhoEstimate rho_bar(const SemiImplicitFom& fom, const Vector& mu,
                    const Trajectory& fom_traj, const ReducedModel& rom,
                    const RomTrajectory& rom_traj) {
    const Index K = std::min<Index>(fom_traj.snapshot_steps.size(),
                                    rom_traj.snapshot_steps.size());
    if (K == 0) throw std::invalid_argument("no shared snapshot instants");

    const SpMatrix E = fom.E(mu);
    const SpMatrix A = fom.A(mu);

    RhoEstimate est;
    double sum = 0.0;
    for (Index i = 0; i < K; ++i) {
        if (fom_traj.snapshot_steps[i] != rom_traj.snapshot_steps[i])
            throw std::invalid_argument("snapshot instants do not align");
        const Index step = rom_traj.snapshot_steps[i];
        const Vector x_hat = rom.V * rom_traj.reduced_states.col(step);
        const double aux = (E * (fom_traj.states.col(i) - x_hat)).norm();
        const double full = residual_full_at(fom, mu, E, A, rom.V,
                                             rom_traj.reduced_states, step)
                                .norm();
        if (full < 1e-14) {
            ++est.skipped;
            continue;
        }
        sum += aux / full;
        ++est.used;
    }
    if (est.used == 0) {
        est.degenerate = true;
        est.value = 1.0;
    } else {
        est.value = sum / est.used;
    }
    return est;
}

CorrectedOutputs corrected_outputs(const SemiImplicitFom& fom,
                                   const Vector& mu, const ReducedModel& rom,
                                   const RomTrajectory& traj,
                                   const DualSolution& dual) {
    const SpMatrix E = fom.E(mu);
    const SpMatrix A = fom.A(mu);
    const Index K = static_cast<Index>(traj.snapshot_steps.size());

    CorrectedOutputs out;
    out.y.resize(fom.n_outputs, K);
    out.r_pr_norm.resize(K);
    for (Index i = 0; i < K; ++i) {
        const Index step = traj.snapshot_steps[i];
        const Vector r = residual_full_at(fom, mu, E, A, rom.V,
                                          traj.reduced_states, step);
        out.y.col(i) = traj.outputs.col(step) - dual.x_du.transpose() * r;
        out.r_pr_norm[i] = r.norm();
    }
    return out;
}

ErrorReport output_indicator(IndicatorMode mode, const ResidualSeries& series,
                             const DualSolution& dual, double rho,
                             double sigma_min,
                             const CorrectedOutputs* corrected) {
    if (!(sigma_min > 0.0))
        throw std::invalid_argument("output indicator needs sigma_min > 0");
    const Index K = static_cast<Index>(series.r_rb_norm.size());
    const Index n_out = dual.r_du_norm.size();
    if (n_out == 0) throw std::invalid_argument("dual solution has no rows");

    double mean_rb_raw = 0.0, mean_i_raw = 0.0;
    for (Index i = 0; i < K; ++i) {
        mean_rb_raw += series.r_rb_norm[i];
        mean_i_raw += series.delta_i_norm[i];
    }
    if (K > 0) {
        mean_rb_raw /= K;
        mean_i_raw /= K;
    }

    const double inv_sigma = 1.0 / sigma_min;
    ErrorReport report;
    report.rho = rho;
    report.sigma_min = sigma_min;
    double worst = -1.0;
    double worst_coef = 0.0;
    for (Index i = 0; i < n_out; ++i) {
        const double r_du = dual.r_du_norm[i];
        const double x_du_norm = dual.x_du.col(i).norm();
        const double coef =
            mode == IndicatorMode::original
                ? rho * (inv_sigma * r_du + x_du_norm)
                : rho * inv_sigma * r_du + std::abs(1.0 - rho) * x_du_norm;
        const double delta_row = coef * (mean_rb_raw + mean_i_raw);
        if (delta_row > worst) {
            worst = delta_row;
            worst_coef = coef;
        }
    }
    report.coefficient = worst_coef;
    report.delta_rb = worst_coef * mean_rb_raw;
    report.delta_i = worst_coef * mean_i_raw;
    report.delta = report.delta_rb + report.delta_i;
    report.delta_rb_steps.resize(K);
    report.delta_i_steps.resize(K);
    for (Index i = 0; i < K; ++i) {
        report.delta_rb_steps[i] = worst_coef * series.r_rb_norm[i];
        report.delta_i_steps[i] = worst_coef * series.delta_i_norm[i];
    }
    if (corrected) report.y_corrected = corrected->y;
    return report;
}

double true_mean_output_error(const Trajectory& fom_traj,
                              const Matrix& y_rom) {
    const Index K = std::min<Index>(fom_traj.snapshot_steps.size(),
                                    y_rom.cols());
    if (K == 0) throw std::invalid_argument("no snapshot instants to compare");
    double sum = 0.0;
    for (Index i = 0; i < K; ++i) {
        const Index step = fom_traj.snapshot_steps[i];
        sum += (fom_traj.outputs.col(step) - y_rom.col(i)).norm();
    }
    return sum / K;
}

Matrix outputs_at_snapshots(const RomTrajectory& traj) {
    const Index K = static_cast<Index>(traj.snapshot_steps.size());
    Matrix y(traj.outputs.rows(), K);
    for (Index i = 0; i < K; ++i)
        y.col(i) = traj.outputs.col(traj.snapshot_steps[i]);
    return y;
}

}  // namespace admor
