#include "admor/fom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace admor {

// Batch chromatography of a binary mixture in scaled form. Per component
// z in {a, b}, with concentrations normalized by the feed:
//
//   dc_z/dt + nu dq_z/dt = -dc_z/dx + (1/Pe) d2c_z/dx2,   nu = (1-eps)/eps,
//   dq_z/dt = g_z(Q) (q_z^eq(c_a, c_b) - q_z),            g_z = L eps A_c kappa_z / Q,
//
// with the bi-Langmuir equilibrium
//
//   q_z^eq = H_z1 c_z / (1 + K_a1 cf_a c_a + K_b1 cf_b c_b)
//          + H_z2 c_z / (1 + K_a2 cf_a c_a + K_b2 cf_b c_b).
//
// Finite volumes on m = n/4 cells: Lax-Friedrichs flux for convection
// (explicit), central differences and Crank-Nicolson for diffusion, so E and
// A are non-parametric tridiagonal blocks and all parameter dependence sits
// in f, the injection input and the horizon. Parameters mu = (Q, t_in); the
// feed pulse chi(t in [0, t_in]) enters the first cell of each concentration
// with the coefficient d0/dt = Pe/2 + 1/dx. Simulated time is
// horizon_const / Q, long enough for the unretained part of the pulse to
// leave the column. Outputs are the two outlet concentrations.
//
// The coefficient values are stand-ins chosen to be physically plausible;
// they are not calibrated against any particular column.

SemiImplicitFom make_chromatography_fom(Index n, double dt,
                                        const ChromatographyCoefficients& c,
                                        Index snapshot_stride) {
    if (n < 8 || n % 4 != 0 || dt <= 0.0)
        throw std::invalid_argument(
            "make_chromatography_fom: n must be a positive multiple of 4");
    if (c.porosity <= 0.0 || c.porosity >= 1.0 || c.peclet <= 0.0 ||
        c.horizon_const <= 0.0)
        throw std::invalid_argument(
            "make_chromatography_fom: incomplete or non-physical coefficients");

    const Index m = n / 4;
    const double dx = 1.0 / static_cast<double>(m);
    if (dt > dx)
        throw std::invalid_argument(
            "make_chromatography_fom: dt violates the Lax-Friedrichs CFL "
            "bound dt <= dx");
    const double nu = (1.0 - c.porosity) / c.porosity;
    const double diff = dt / (2.0 * c.peclet * dx * dx);  // CN half-step

    // Concentration blocks. E_c = I - CN diffusion; A_c = Lax-Friedrichs
    // average + central convection + explicit CN diffusion half. Inlet ghost
    // cell is zero (the feed enters through B); outlet is zero-gradient.
    std::vector<Eigen::Triplet<double>> te, ta;
    for (Index i = 0; i < m; ++i) {
        const bool first = i == 0, last = i + 1 == m;
        const double e_diag = last ? 1.0 + diff : 1.0 + 2.0 * diff;
        te.emplace_back(i, i, e_diag);
        if (!first) te.emplace_back(i, i - 1, -diff);
        if (!last) te.emplace_back(i, i + 1, -diff);

        const double lo = 0.5 + dt / (2.0 * dx) + diff;   // coefficient of c_{i-1}
        const double up = 0.5 - dt / (2.0 * dx) + diff;   // coefficient of c_{i+1}
        double diag = -2.0 * diff;
        if (last) diag += up;  // ghost c_m = c_{m-1}
        ta.emplace_back(i, i, diag);
        if (!first) ta.emplace_back(i, i - 1, lo);
        if (!last) ta.emplace_back(i, i + 1, up);
    }
    SpMatrix Ec(m, m), Ac(m, m);
    Ec.setFromTriplets(te.begin(), te.end());
    Ac.setFromTriplets(ta.begin(), ta.end());

    // Full operators over x = [c_a; q_a; c_b; q_b].
    auto block_diag = [m, n](const SpMatrix& conc) {
        std::vector<Eigen::Triplet<double>> trip;
        for (int block : {0, 2}) {
            const Index off = block * m;
            for (Index k = 0; k < conc.outerSize(); ++k)
                for (SpMatrix::InnerIterator it(conc, k); it; ++it)
                    trip.emplace_back(off + it.row(), off + it.col(),
                                      it.value());
        }
        for (int block : {1, 3}) {
            const Index off = block * m;
            for (Index i = 0; i < m; ++i)
                trip.emplace_back(off + i, off + i, 1.0);
        }
        SpMatrix out(n, n);
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };
    const SpMatrix E_full = block_diag(Ec);
    const SpMatrix A_full = block_diag(Ac);

    SemiImplicitFom fom;
    fom.model_id = "chromatography";
    fom.n = n;
    fom.n_outputs = 2;
    fom.n_inputs = 1;
    fom.dt = dt;
    fom.snapshot_stride = snapshot_stride;
    fom.parametric_operator = false;
    fom.domain.lo = Vector(2);
    fom.domain.hi = Vector(2);
    fom.domain.lo << 0.0667, 0.5;
    fom.domain.hi << 0.1667, 2.0;

    fom.E = [E_full](const Vector&) { return E_full; };
    fom.A = [A_full](const Vector&) { return A_full; };

    fom.B = SpMatrix(n, 1);
    {
        const double feed = c.peclet / 2.0 + 1.0 / dx;
        std::vector<Eigen::Triplet<double>> trip;
        trip.emplace_back(0, 0, feed);
        trip.emplace_back(2 * m, 0, feed);
        fom.B.setFromTriplets(trip.begin(), trip.end());
    }
    fom.C = Matrix::Zero(2, n);
    fom.C(0, m - 1) = 1.0;
    fom.C(1, 3 * m - 1) = 1.0;

    fom.input = [](double t, const Vector& mu) {
        return Vector::Constant(1, t <= mu[1] ? 1.0 : 0.0);
    };
    fom.steps_for = [cst = c.horizon_const, dt](const Vector& mu) {
        return static_cast<Index>(std::llround(cst / mu[0] / dt));
    };
    fom.steps = fom.steps_for(0.5 * (fom.domain.lo + fom.domain.hi));

    // Mass transfer rates for one cell; h_a and h_b as in the model above.
    struct Isotherm {
        ChromatographyCoefficients c;
        double group;  // L eps A_c, divided by Q at evaluation time

        std::pair<double, double> rates(double ca, double qa, double cb,
                                        double qb, double Q) const {
            const double d1 = 1.0 + c.k_a1 * c.feed_a * ca + c.k_b1 * c.feed_b * cb;
            const double d2 = 1.0 + c.k_a2 * c.feed_a * ca + c.k_b2 * c.feed_b * cb;
            const double qa_eq = c.henry_a1 * ca / d1 + c.henry_a2 * ca / d2;
            const double qb_eq = c.henry_b1 * cb / d1 + c.henry_b2 * cb / d2;
            const double scale = group / Q;
            return {scale * c.kappa_a * (qa_eq - qa),
                    scale * c.kappa_b * (qb_eq - qb)};
        }
    };
    const Isotherm iso{c, c.column_length * c.porosity * c.cross_section};

    fom.f = [iso, nu, m, n](const Vector& x, const Vector& mu) {
        Vector out(n);
        for (Index i = 0; i < m; ++i) {
            const auto [ha, hb] = iso.rates(x[i], x[m + i], x[2 * m + i],
                                            x[3 * m + i], mu[0]);
            out[i] = -nu * ha;
            out[m + i] = ha;
            out[2 * m + i] = -nu * hb;
            out[3 * m + i] = hb;
        }
        return out;
    };
    fom.f_rows = [iso, nu, m](const Vector& x, const Vector& mu,
                              const std::vector<Index>& rows) {
        Vector out(static_cast<Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Index j = rows[r];
            const Index i = j % m;
            const auto [ha, hb] = iso.rates(x[i], x[m + i], x[2 * m + i],
                                            x[3 * m + i], mu[0]);
            const Index block = j / m;
            const double h = block < 2 ? ha : hb;
            out[static_cast<Index>(r)] = block % 2 == 0 ? -nu * h : h;
        }
        return out;
    };
    fom.stencil = [m](const std::vector<Index>& rows) {
        std::vector<Index> idx;
        idx.reserve(4 * rows.size());
        for (Index j : rows) {
            const Index i = j % m;
            for (Index block = 0; block < 4; ++block)
                idx.push_back(block * m + i);
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        return idx;
    };
    return fom;
}

}  // namespace admor
