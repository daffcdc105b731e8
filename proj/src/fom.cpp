#include "admor/fom.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace admor {

bool Box::contains(const Vector& mu) const {
    if (mu.size() != lo.size()) return false;
    // A hair of slack so points parsed back from text configs stay inside.
    for (Index i = 0; i < mu.size(); ++i) {
        const double span = hi[i] - lo[i];
        const double slack = 1e-12 * std::max(1.0, std::abs(span));
        if (mu[i] < lo[i] - slack || mu[i] > hi[i] + slack) return false;
    }
    return true;
}

TrainingSet log_uniform_points_1d(double lo, double hi, Index n) {
    if (lo <= 0.0 || hi <= lo || n < 1)
        throw std::invalid_argument("log_uniform_points_1d: bad range");
    TrainingSet pts;
    pts.reserve(static_cast<std::size_t>(n));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (Index i = 0; i < n; ++i) {
        const double w = n == 1 ? 0.0
                                : static_cast<double>(i) /
                                      static_cast<double>(n - 1);
        Vector p(1);
        p[0] = std::exp(llo + w * (lhi - llo));
        pts.push_back(p);
    }
    return pts;
}

TrainingSet uniform_grid_2d(const Box& domain, Index n0, Index n1) {
    if (domain.dim() != 2 || n0 < 1 || n1 < 1)
        throw std::invalid_argument("uniform_grid_2d: bad arguments");
    TrainingSet pts;
    pts.reserve(static_cast<std::size_t>(n0 * n1));
    for (Index i = 0; i < n0; ++i) {
        const double w0 =
            n0 == 1 ? 0.0
                    : static_cast<double>(i) / static_cast<double>(n0 - 1);
        for (Index j = 0; j < n1; ++j) {
            const double w1 =
                n1 == 1 ? 0.0
                        : static_cast<double>(j) / static_cast<double>(n1 - 1);
            Vector p(2);
            p[0] = domain.lo[0] + w0 * (domain.hi[0] - domain.lo[0]);
            p[1] = domain.lo[1] + w1 * (domain.hi[1] - domain.lo[1]);
            pts.push_back(p);
        }
    }
    return pts;
}

Trajectory simulate_fom(const SemiImplicitFom& fom, const Vector& mu) {
    if (!fom.domain.contains(mu))
        throw std::invalid_argument("simulate_fom: mu outside domain");

    const Index steps = fom.step_count(mu);
    const Index stride = fom.snapshot_stride;
    const Index n_snaps = steps / stride;

    const SpMatrix E = fom.E(mu);
    const SpMatrix A = fom.A(mu);
    Eigen::SparseLU<SpMatrix> lu(E);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("simulate_fom: implicit operator singular");

    Trajectory traj;
    traj.states.resize(fom.n, n_snaps);
    traj.f_snapshots.resize(fom.n, n_snaps);
    traj.outputs.resize(fom.n_outputs, steps + 1);
    traj.snapshot_steps.reserve(static_cast<std::size_t>(n_snaps));

    Vector x = Vector::Zero(fom.n);
    traj.outputs.col(0) = fom.C * x;
    Index col = 0;
    for (Index k = 0; k < steps; ++k) {
        Vector rhs = A * x;
        rhs.noalias() += fom.dt * fom.f(x, mu);
        rhs.noalias() +=
            fom.dt * (fom.B * fom.input(static_cast<double>(k) * fom.dt, mu));
        x = lu.solve(rhs);
        if (!x.allFinite())
            throw std::runtime_error("simulate_fom: non-finite state at step " +
                                     std::to_string(k + 1));
        traj.outputs.col(k + 1) = fom.C * x;
        if ((k + 1) % stride == 0) {
            traj.states.col(col) = x;
            traj.f_snapshots.col(col) = fom.f(x, mu);
            traj.snapshot_steps.push_back(k + 1);
            ++col;
        }
    }
    return traj;
}

}  // namespace admor
