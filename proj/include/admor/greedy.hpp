#pragma once

// Basis-construction drivers: the standard POD-Greedy loop (with or without
// a precomputed interpolation basis), the basis-count update rule, the
// two-way adaptive POD-(D)EIM loop for non-parametric systems, and the
// adaptive POD-Greedy-(D)EIM loop with zone-of-acceptance termination.

#include "admor/error_estimation.hpp"
#include "admor/fom.hpp"
#include "admor/infsup.hpp"
#include "admor/interpolation.hpp"
#include "admor/linalg.hpp"
#include "admor/reduction.hpp"

#include <map>
#include <optional>
#include <vector>

namespace admor {

struct GreedyConfig {
    double tol = 1e-3;              // output error tolerance (tol_RB)
    double tol_ei_factor = 0.01;    // tol_EI = tol_ei_factor * tol
    double zoa_lower_factor = 0.1;  // zone of acceptance [factor * tol, tol]
    Index max_iter = 50;
    double eps_pod = 1e-10;  // singular-value energy cutoff for DEIM pools
    double eps_ei = 1e-10;   // EIM residual stopping threshold
    InterpMethod method = InterpMethod::eim;
    IndicatorMode mode = IndicatorMode::modified;
    Index initial_l_rb = 1;  // adaptive: first-iteration POD mode count
    Index initial_l_ei = 1;  // adaptive: first interpolation target
    // 0 selects the first training point as the initial mu*; any other value
    // seeds a uniform draw over the training set.
    unsigned seed = 0;
    Index fine_margin = 5;  // extra interpolation vectors for the error split
    double dual_tol_factor = 1.0;   // dual enrichment tolerance = factor * tol
    double adss_angle_tol = 0.0;    // > 0 enables angle-based pool thinning
    double gmres_tol = 1e-6;
    double ilu_drop_tol = 1e-3;
    Index infsup_n_coarse = 0;  // 0: max(d+1, 4)
    double infsup_tol_change = 1e-2;
    Index infsup_max_centers = 40;
    Index jobs = 1;  // indicator-sweep worker threads

    double tol_ei() const { return tol_ei_factor * tol; }
    double zoa_lower() const { return zoa_lower_factor * tol; }
};

struct IterationRecord {
    Index iteration = 0;  // 1-based
    Vector mu_star;       // argmax of the indicator at the end of the iteration
    Index l_rb = 0;            // rank of V at iteration end
    Index l_ei = 0;            // interpolation basis size at iteration end
    Index l_rb_increment = 0;  // POD modes added this iteration (may be < 0)
    double delta_rb = 0.0, delta_i = 0.0, delta = 0.0;  // at the new mu_star
    double delta_max = 0.0;   // max over the training set (== delta here)
    double true_error = -1.0;  // at the most recently simulated parameter
    double rho = 1.0;
    double eff_original = -1.0, eff_modified = -1.0;
    double wall_seconds = 0.0;
};

enum class TerminationCause { zoa, tol, max_iter, stagnation };
const char* to_string(TerminationCause cause);

struct GreedyState {
    ReducedBasis basis;
    std::optional<InterpBasis> interp;  // at its final working size
    Matrix V_du;                        // dual reduced basis (parametric runs)
    std::vector<Index> selected;        // training indices of simulated mu*
    std::vector<IterationRecord> history;
    TerminationCause cause = TerminationCause::max_iter;
    Index fom_simulations = 0;
    double setup_seconds = 0.0;  // pool precompute / surrogate build
    double total_seconds = 0.0;
    std::optional<InfSupSurrogate> infsup;
    // Full-order trajectories computed along the way, keyed by training
    // index; reused by validation sweeps so FOM counts stay honest.
    std::map<Index, Trajectory> fom_cache;
};

// Basis-count update rule. p and d are the floored base-10 logs of the
// indicator/tolerance ratios; the +-1 trivial updates fire only when the
// floor is zero. l_rb_next is a per-iteration mode count (negative means
// column removal); l_ei_next is the cumulative target, raised when needed so
// that l_ei_next > rank_v + max(l_rb_next, 0). Zero indicators are treated
// as ratio 1e-16 and shrinks are capped at 3 per call.
struct BasisUpdate {
    int p = 0, d = 0;
    int p0 = 0, d0 = 0;
    Index l_rb_next = 0;
    Index l_ei_next = 0;
};

BasisUpdate adapt_basis_update(Index l_rb, Index l_ei, double delta_rb,
                               double delta_i, double tol_rb, double tol_ei,
                               Index rank_v);

// Standard POD-Greedy: one POD mode of the deflated snapshots per iteration,
// exact nonlinearity in the ROM, termination when the indicator at the new
// argmax drops below tol.
GreedyState pod_greedy_standard(const SemiImplicitFom& fom,
                                const TrainingSet& xi,
                                const GreedyConfig& cfg);

// Standard POD-Greedy-(D)EIM: first simulates the FOM at every training
// parameter to build the interpolation basis (sized by eps_ei / eps_pod),
// then runs the standard greedy loop on the hyper-reduced ROM.
GreedyState pod_greedy_deim_standard(const SemiImplicitFom& fom,
                                     const TrainingSet& xi,
                                     const GreedyConfig& cfg);

// Adaptive POD-Greedy-(D)EIM with the zone of acceptance: both basis sizes
// follow the update rule, the interpolation basis is rebuilt each iteration
// from the nonlinear snapshots of all selected parameters, and the FOM is
// simulated only at selected parameters.
GreedyState adaptive_pod_greedy_deim(const SemiImplicitFom& fom,
                                     const TrainingSet& xi,
                                     const GreedyConfig& cfg);

// Two-way adaptive POD-(D)EIM at a single parameter: conservative bases are
// truncated to the current counts, the indicator decides growth or
// shrinkage, and revisiting a count pair terminates with a stagnation cause.
struct TwoWayConfig {
    double tol = 1e-4;
    double zoa_lower_factor = 0.1;
    Index max_iter = 50;
    Index initial_l_rb = 3;
    Index initial_l_ei = 8;
    IndicatorMode mode = IndicatorMode::modified;
    Index fine_margin = 5;
    double gmres_tol = 1e-6;
    double ilu_drop_tol = 1e-3;

    double tol_ei() const { return 0.01 * tol; }
    double zoa_lower() const { return zoa_lower_factor * tol; }
};

struct TwoWayResult {
    Index l_rb = 0, l_ei = 0;  // final counts
    std::vector<IterationRecord> history;
    TerminationCause cause = TerminationCause::max_iter;
    double total_seconds = 0.0;
};

TwoWayResult adaptive_pod_deim_twoway(const SemiImplicitFom& fom,
                                      const Trajectory& fom_traj,
                                      const ReducedBasis& basis_full,
                                      const InterpBasis& interp_full,
                                      const TwoWayConfig& cfg);

}  // namespace admor
