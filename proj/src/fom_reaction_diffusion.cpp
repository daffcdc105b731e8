#include "admor/fom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace admor {

// Synthetic non-parametric benchmark: 1D reaction-diffusion on (0,1) with
// unit diffusion, homogeneous Dirichlet ends, cubic reaction f(x) = x - x^3
// (pointwise) and a constant unit source. Diffusion is implicit
// (E = I - dt L), reaction and source explicit. Output is the midpoint
// value. Starting from zero the state rises into the stable x ~ 1 basin,
// giving a smooth nonlinear transient with fast-decaying singular values.

SemiImplicitFom make_reaction_diffusion_fom(Index n, double dt, double horizon,
                                            Index snapshot_stride) {
    if (n < 3 || dt <= 0.0 || horizon <= 0.0)
        throw std::invalid_argument("make_reaction_diffusion_fom: bad arguments");

    const double h = 1.0 / static_cast<double>(n + 1);
    const double ih2 = 1.0 / (h * h);

    SpMatrix L(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(3 * n));
        for (Index j = 0; j < n; ++j) {
            trip.emplace_back(j, j, -2.0 * ih2);
            if (j > 0) trip.emplace_back(j, j - 1, ih2);
            if (j + 1 < n) trip.emplace_back(j, j + 1, ih2);
        }
        L.setFromTriplets(trip.begin(), trip.end());
    }
    SpMatrix identity(n, n);
    identity.setIdentity();

    SemiImplicitFom fom;
    fom.model_id = "reaction-diffusion";
    fom.n = n;
    fom.n_outputs = 1;
    fom.n_inputs = 1;
    fom.dt = dt;
    fom.steps = static_cast<Index>(std::llround(horizon / dt));
    fom.snapshot_stride = snapshot_stride;
    fom.parametric_operator = false;
    fom.domain.lo = Vector(0);
    fom.domain.hi = Vector(0);

    const SpMatrix E_fixed = identity - dt * L;
    fom.E = [E_fixed](const Vector&) { return E_fixed; };
    fom.A = [identity](const Vector&) { return identity; };
    fom.B = SpMatrix(n, 1);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (Index j = 0; j < n; ++j) trip.emplace_back(j, 0, 1.0);
        fom.B.setFromTriplets(trip.begin(), trip.end());
    }
    fom.C = Matrix::Zero(1, n);
    fom.C(0, n / 2) = 1.0;
    fom.input = [](double, const Vector&) { return Vector::Constant(1, 1.0); };

    fom.f = [n](const Vector& x, const Vector&) {
        Vector out(n);
        for (Index j = 0; j < n; ++j) out[j] = x[j] - x[j] * x[j] * x[j];
        return out;
    };
    fom.f_rows = [](const Vector& x, const Vector&,
                    const std::vector<Index>& rows) {
        Vector out(static_cast<Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double v = x[rows[i]];
            out[static_cast<Index>(i)] = v - v * v * v;
        }
        return out;
    };
    fom.stencil = [](const std::vector<Index>& rows) { return rows; };
    return fom;
}

}  // namespace admor
