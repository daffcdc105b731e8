#pragma once

// POD basis construction, Galerkin projection (optionally with empirical
// interpolation of the nonlinearity), ROM time stepping, and angle-based
// snapshot thinning (AdSS).

#include "admor/fom.hpp"
#include "admor/interpolation.hpp"
#include "admor/linalg.hpp"

#include <optional>
#include <vector>

namespace admor {

// Where a basis column came from: index of the selected parameter in the
// training set (-1 when unknown) and the POD mode number within that batch.
struct BasisColumnOrigin {
    Index param_index = -1;
    Index mode = 0;
};

struct ReducedBasis {
    Matrix V;  // N x l_RB, orthonormal columns
    std::vector<BasisColumnOrigin> provenance;

    Index size() const { return V.cols(); }
};

ReducedBasis pod(const Matrix& X, const SvdRule& rule);

struct ReducedModel {
    const SemiImplicitFom* fom = nullptr;
    Matrix V;

    Matrix B_r;  // V^T B
    Matrix C_r;  // C V

    // Interpolated-nonlinearity pieces; empty when the ROM evaluates f in
    // full dimension (plain Galerkin).
    std::optional<InterpBasis> interp;
    Matrix coupling;                 // V^T U (P^T U)^{-1}
    std::vector<Index> stencil_idx;  // stencil closure of interp indices
    Matrix V_stencil;                // rows of V at stencil_idx

    // Cached projections for non-parametric operators.
    std::optional<Matrix> E_r_fixed, A_r_fixed;

    Matrix E_r(const Vector& mu) const;
    Matrix A_r(const Vector& mu) const;
};

ReducedModel project_rom(const SemiImplicitFom& fom, const ReducedBasis& V,
                         const std::optional<InterpBasis>& interp);

struct RomTrajectory {
    Matrix reduced_states;  // l_RB x (steps+1), all steps including t_0
    Matrix outputs;         // n_outputs x (steps+1)
    std::vector<Index> snapshot_steps;  // as in the FOM trajectory
    // A non-finite state aborts the run; the adaptive loop treats this as an
    // estimated error of +infinity rather than an exception.
    bool stable = true;
    Index failed_step = -1;

    Vector state_at_step(const Matrix& V, Index step) const {
        return V * reduced_states.col(step);
    }
};

RomTrajectory simulate_rom(const ReducedModel& rom, const Vector& mu);

struct AdssResult {
    std::vector<Index> kept;
    Matrix thinned;
    Index skipped_zero = 0;  // zero columns have no direction; dropped
};

// Sequential angle-based thinning: always keeps the first nonzero column,
// then keeps column j iff sin of the angle between x_j and the last kept
// column is >= angle_tol.
AdssResult adss_filter(const Matrix& X, double angle_tol);

}  // namespace admor
