#include "admor/fom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace admor {

// Viscous Burgers on (0,1]: w_t + w w_s = mu w_ss + 1, w(s,0) = 0, with
// homogeneous Dirichlet at the inflow (w(0,t) = 0) and a Neumann mirror at
// the outflow (w_s(1,t) = 0). Central differences for both convection and
// diffusion on n interior nodes s_i = i/n; diffusion is implicit, so
// E(mu) = I - dt mu L with L the second-difference operator, A = I, and
// f(x) = -x .* (D x). The output is the value at s = 1.

namespace {

struct BurgersOps {
    Index n;
    double h;

    double dx_at(const Vector& x, Index j) const {
        if (j == n - 1) return 0.0;  // mirror ghost: x_{n} == x_{n-2}
        const double left = j == 0 ? 0.0 : x[j - 1];
        return (x[j + 1] - left) / (2.0 * h);
    }
};

}  // namespace

SemiImplicitFom make_burgers_fom(Index n, double dt, double horizon,
                                 double mu_lo, double mu_hi,
                                 Index snapshot_stride) {
    if (n < 3 || dt <= 0.0 || horizon <= 0.0 || mu_lo <= 0.0 || mu_hi <= mu_lo)
        throw std::invalid_argument("make_burgers_fom: bad arguments");

    const double h = 1.0 / static_cast<double>(n);
    const double ih2 = 1.0 / (h * h);

    SpMatrix L(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(3 * n));
        for (Index j = 0; j < n; ++j) {
            trip.emplace_back(j, j, -2.0 * ih2);
            if (j > 0)
                trip.emplace_back(j, j - 1, j == n - 1 ? 2.0 * ih2 : ih2);
            if (j + 1 < n) trip.emplace_back(j, j + 1, ih2);
        }
        L.setFromTriplets(trip.begin(), trip.end());
    }

    SpMatrix identity(n, n);
    identity.setIdentity();

    SemiImplicitFom fom;
    fom.model_id = "burgers";
    fom.n = n;
    fom.n_outputs = 1;
    fom.n_inputs = 1;
    fom.dt = dt;
    fom.steps = static_cast<Index>(std::llround(horizon / dt));
    fom.snapshot_stride = snapshot_stride;
    fom.parametric_operator = true;
    fom.domain.lo = Vector::Constant(1, mu_lo);
    fom.domain.hi = Vector::Constant(1, mu_hi);

    fom.E = [identity, L, dt](const Vector& mu) -> SpMatrix {
        return identity - dt * mu[0] * L;
    };
    fom.A = [identity](const Vector&) -> SpMatrix { return identity; };
    fom.B = SpMatrix(n, 1);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (Index j = 0; j < n; ++j) trip.emplace_back(j, 0, 1.0);
        fom.B.setFromTriplets(trip.begin(), trip.end());
    }
    fom.C = Matrix::Zero(1, n);
    fom.C(0, n - 1) = 1.0;
    fom.input = [](double, const Vector&) { return Vector::Constant(1, 1.0); };

    const BurgersOps ops{n, h};
    fom.f = [ops](const Vector& x, const Vector&) {
        Vector out(ops.n);
        for (Index j = 0; j < ops.n; ++j) out[j] = -x[j] * ops.dx_at(x, j);
        return out;
    };
    fom.f_rows = [ops](const Vector& x, const Vector&,
                       const std::vector<Index>& rows) {
        Vector out(static_cast<Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Index j = rows[i];
            out[static_cast<Index>(i)] = -x[j] * ops.dx_at(x, j);
        }
        return out;
    };
    fom.stencil = [n](const std::vector<Index>& rows) {
        std::vector<Index> idx;
        idx.reserve(3 * rows.size());
        for (Index j : rows) {
            if (j > 0) idx.push_back(j - 1);
            idx.push_back(j);
            if (j + 1 < n) idx.push_back(j + 1);
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        return idx;
    };
    return fom;
}

}  // namespace admor
