#pragma once

// Full-order models in semi-implicit discrete form,
//
//   E(mu) x^{k+1} = A(mu) x^k + dt f(x^k, mu) + dt B u(t_k, mu),
//   y^{k+1}       = C x^{k+1},
//
// plus the benchmark assemblies (viscous Burgers, batch chromatography,
// synthetic reaction-diffusion) and the time stepper. All shipped models
// start from a zero initial state.

#include "admor/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace admor {

// Axis-aligned parameter domain.
struct Box {
    Vector lo, hi;

    Index dim() const { return lo.size(); }
    bool contains(const Vector& mu) const;
};

using TrainingSet = std::vector<Vector>;

// n points, log-equispaced inclusive of both endpoints.
TrainingSet log_uniform_points_1d(double lo, double hi, Index n);
// n0 x n1 tensor grid inclusive of domain corners; axis 0 varies slowest.
TrainingSet uniform_grid_2d(const Box& domain, Index n0, Index n1);

struct SemiImplicitFom {
    std::string model_id;
    Index n = 0;
    Index n_outputs = 0;
    Index n_inputs = 0;
    double dt = 0.0;
    Index steps = 0;
    Index snapshot_stride = 10;
    // True when E/A depend on mu; drives the dual-solution strategy.
    bool parametric_operator = false;
    Box domain;

    std::function<SpMatrix(const Vector& mu)> E;  // implicit-side operator
    std::function<SpMatrix(const Vector& mu)> A;  // explicit-side operator
    SpMatrix B;
    Matrix C;  // n_outputs x n
    std::function<Vector(double t, const Vector& mu)> input;
    std::function<Vector(const Vector& x, const Vector& mu)> f;
    // f at the given rows only. x must hold valid values at stencil(rows)
    // entries; other entries may be garbage and must not be read.
    std::function<Vector(const Vector& x, const Vector& mu,
                         const std::vector<Index>& rows)>
        f_rows;
    // Sorted unique state indices read when evaluating f at `rows`.
    std::function<std::vector<Index>(const std::vector<Index>& rows)> stencil;
    // Optional parameter-dependent horizon; empty means `steps` for all mu.
    std::function<Index(const Vector& mu)> steps_for;

    Index step_count(const Vector& mu) const {
        return steps_for ? steps_for(mu) : steps;
    }
};

struct Trajectory {
    // States at the snapshot instants t_1..t_K (stride multiples; t_0 is the
    // zero initial state and is not stored).
    Matrix states;         // n x K
    Matrix f_snapshots;    // n x K, f evaluated at the stored states
    Matrix outputs;        // n_outputs x (steps+1), all steps including t_0
    std::vector<Index> snapshot_steps;  // global step index per stored column
};

// Steps the model with a sparse direct solve per time step (the implicit
// operator is factorized once per call). Throws on non-finite states or if
// mu leaves the domain.
Trajectory simulate_fom(const SemiImplicitFom& fom, const Vector& mu);

// Benchmark assemblies. Coefficient choices are documented in the sources.
SemiImplicitFom make_burgers_fom(Index n, double dt, double horizon,
                                 double mu_lo, double mu_hi,
                                 Index snapshot_stride = 10);

struct ChromatographyCoefficients {
    double porosity = 0.4;        // epsilon
    double peclet = 800.0;        // Pe
    double column_length = 1.0;   // L
    double cross_section = 0.785; // A_c
    double kappa_a = 1.0;
    double kappa_b = 1.0;
    double henry_a1 = 2.69, henry_a2 = 0.1;
    double henry_b1 = 3.73, henry_b2 = 0.3;
    double k_a1 = 0.0466, k_a2 = 3.0;
    double k_b1 = 0.0336, k_b2 = 1.0;
    double feed_a = 2.9, feed_b = 2.9;
    // Horizon constant: simulated time at flow rate Q is horizon_const / Q.
    double horizon_const = 0.55;
};

SemiImplicitFom make_chromatography_fom(Index n, double dt,
                                        const ChromatographyCoefficients& c,
                                        Index snapshot_stride = 20);

SemiImplicitFom make_reaction_diffusion_fom(Index n, double dt, double horizon,
                                            Index snapshot_stride = 10);

}  // namespace admor
