#include "admor/reduction.hpp"

#include <cmath>
#include <stdexcept>

namespace admor {

ReducedBasis pod(const Matrix& X, const SvdRule& rule) {
    ReducedBasis basis;
    if (X.size() == 0) return basis;
    SvdResult svd = truncated_svd(X, rule);
    basis.V = std::move(svd.left);
    basis.provenance.resize(static_cast<std::size_t>(basis.V.cols()));
    for (Index j = 0; j < basis.V.cols(); ++j)
        basis.provenance[static_cast<std::size_t>(j)].mode = j;
    return basis;
}

ReducedModel project_rom(const SemiImplicitFom& fom, const ReducedBasis& basis,
                         const std::optional<InterpBasis>& interp) {
    if (basis.V.rows() != fom.n)
        throw std::invalid_argument("project_rom: basis/model dimension mismatch");

    ReducedModel rom;
    rom.fom = &fom;
    rom.V = basis.V;
    rom.B_r = rom.V.transpose() * fom.B;
    rom.C_r = fom.C * rom.V;

    if (interp) {
        rom.interp = *interp;
        rom.coupling =
            (rom.V.transpose() * interp->U) * interp->PtU.inverse();
        rom.stencil_idx = fom.stencil(interp->indices);
        rom.V_stencil.resize(static_cast<Index>(rom.stencil_idx.size()),
                             rom.V.cols());
        for (std::size_t i = 0; i < rom.stencil_idx.size(); ++i)
            rom.V_stencil.row(static_cast<Index>(i)) =
                rom.V.row(rom.stencil_idx[i]);
    }
    if (!fom.parametric_operator) {
        const Vector mu_any = fom.domain.lo;
        rom.E_r_fixed = rom.V.transpose() * (fom.E(mu_any) * rom.V);
        rom.A_r_fixed = rom.V.transpose() * (fom.A(mu_any) * rom.V);
    }
    return rom;
}

Matrix ReducedModel::E_r(const Vector& mu) const {
    if (E_r_fixed) return *E_r_fixed;
    return V.transpose() * (fom->E(mu) * V);
}

Matrix ReducedModel::A_r(const Vector& mu) const {
    if (A_r_fixed) return *A_r_fixed;
    return V.transpose() * (fom->A(mu) * V);
}

RomTrajectory simulate_rom(const ReducedModel& rom, const Vector& mu) {
    const SemiImplicitFom& fom = *rom.fom;
    if (!fom.domain.contains(mu))
        throw std::invalid_argument("simulate_rom: mu outside domain");

    const Index steps = fom.step_count(mu);
    const Index stride = fom.snapshot_stride;
    const Index l = rom.V.cols();

    const Eigen::PartialPivLU<Matrix> lu(rom.E_r(mu));
    const Matrix A_r = rom.A_r(mu);

    RomTrajectory traj;
    traj.reduced_states = Matrix::Zero(l, steps + 1);
    traj.outputs.resize(fom.C.rows(), steps + 1);
    traj.outputs.col(0).setZero();
    for (Index k = stride; k <= steps; k += stride)
        traj.snapshot_steps.push_back(k);

    // Work vector for restricted evaluation: full length so f_rows can read
    // stencil entries by global index, but only those entries are written.
    Vector x_full = Vector::Zero(fom.n);
    Vector x_r = Vector::Zero(l);

    for (Index k = 0; k < steps; ++k) {
        Vector rhs = A_r * x_r;
        if (rom.interp) {
            const Vector x_stencil = rom.V_stencil * x_r;
            for (std::size_t i = 0; i < rom.stencil_idx.size(); ++i)
                x_full[rom.stencil_idx[i]] = x_stencil[static_cast<Index>(i)];
            const Vector f_at_idx =
                fom.f_rows(x_full, mu, rom.interp->indices);
            rhs.noalias() += fom.dt * (rom.coupling * f_at_idx);
        } else {
            rhs.noalias() +=
                fom.dt * (rom.V.transpose() * fom.f(rom.V * x_r, mu));
        }
        rhs.noalias() +=
            fom.dt * (rom.B_r * fom.input(static_cast<double>(k) * fom.dt, mu));
        x_r = lu.solve(rhs);
        if (!x_r.allFinite()) {
            traj.stable = false;
            traj.failed_step = k + 1;
            return traj;
        }
        traj.reduced_states.col(k + 1) = x_r;
        traj.outputs.col(k + 1).noalias() = rom.C_r * x_r;
    }
    return traj;
}

AdssResult adss_filter(const Matrix& X, double angle_tol) {
    if (X.cols() == 0) throw std::invalid_argument("adss_filter: empty matrix");
    if (angle_tol <= 0.0 || angle_tol >= 1.0)
        throw std::invalid_argument("adss_filter: angle_tol must be in (0,1)");

    AdssResult res;
    Vector last;  // normalized last kept column
    for (Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0) {
            ++res.skipped_zero;
            continue;
        }
        if (last.size() == 0) {
            res.kept.push_back(j);
            last = X.col(j) / norm;
            continue;
        }
        // sin of the angle = norm of the component orthogonal to `last`.
        const Vector unit = X.col(j) / norm;
        const double sin_angle = (unit - last.dot(unit) * last).norm();
        if (sin_angle >= angle_tol) {
            res.kept.push_back(j);
            last = unit;
        }
    }
    res.thinned.resize(X.rows(), static_cast<Index>(res.kept.size()));
    for (std::size_t i = 0; i < res.kept.size(); ++i)
        res.thinned.col(static_cast<Index>(i)) = X.col(res.kept[i]);
    return res;
}

}  // namespace admor
