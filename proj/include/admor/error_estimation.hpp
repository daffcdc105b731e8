#pragma once

// Output error indication for the semi-implicit ROM: primal/dual residuals,
// the time-averaged residual ratio rho_bar, the original and modified output
// error indicators with their reduced-basis/interpolation split, corrected
// outputs, and both dual-solution strategies (fixed Krylov solve for
// non-parametric operators, a greedily enriched dual reduced basis
// otherwise).

#include "admor/fom.hpp"
#include "admor/interpolation.hpp"
#include "admor/linalg.hpp"
#include "admor/reduction.hpp"

#include <optional>
#include <vector>

namespace admor {

enum class IndicatorMode { original, modified };
enum class DualStrategy { nonparametric_krylov, parametric_rb };

// Approximate solutions of E(mu)^T x_du = -C_i^T, one column per output row,
// with honestly recomputed residual norms.
struct DualSolution {
    DualStrategy mode = DualStrategy::nonparametric_krylov;
    Matrix x_du;       // N x n_outputs
    Vector r_du_norm;  // per output row: ||-C_i^T - E^T x_du_i||
    bool converged = true;
};

// One GMRES+ILU solve per output row; valid only when E is mu-independent.
DualSolution dual_solve_nonparametric(const SemiImplicitFom& fom,
                                      double gmres_tol = 1e-6,
                                      double ilu_drop_tol = 1e-3);

// Dual reduced basis for parametric E(mu): enriched by full dual solves at
// the parameter with the worst dual residual, evaluated everywhere else by
// Galerkin projection of the dual system.
class DualReducedBasis {
  public:
    explicit DualReducedBasis(const SemiImplicitFom& fom) : fom_(&fom) {}

    void set_initial_index(Index idx) { mu_star_idx_ = idx; }

    // If the dual indicator at the current worst parameter exceeds tol:
    // solve the full dual there, extend the basis, re-select the worst
    // parameter as argmax over xi of the reduced dual residual norm.
    // Returns true when the basis was extended.
    bool update(const TrainingSet& xi, double tol);

    DualSolution evaluate(const Vector& mu) const;

    // Max over output rows of ||-C_i^T - E(mu)^T V_du x_du_r(mu)_i||.
    double residual_indicator(const Vector& mu) const;

    const Matrix& basis() const { return V_du_; }
    Index size() const { return V_du_.cols(); }
    Index worst_index() const { return mu_star_idx_; }

  private:
    const SemiImplicitFom* fom_;
    Matrix V_du_;
    Index mu_star_idx_ = 0;
};

// Norm series at the snapshot instants of one ROM trajectory. delta_i_norm
// is the raw interpolation error estimate ||Delta_I^k||; it deliberately
// omits the dt factor that the term dt (f - I[f]) carries inside the
// residual split, so the interpolation indicator measures the nonlinearity
// approximation itself rather than its one-step contribution.
struct ResidualSeries {
    std::vector<double> r_rb_norm;     // ||r_pr,I^{k+1}|| per instant
    std::vector<double> delta_i_norm;  // ||Delta_I^k|| per instant
};

// Assembles r_pr,I^{k+1} = A x_hat^k + dt I[f(x_hat^k)] + dt B u^k
//                          - E x_hat^{k+1}
// in full dimension at every snapshot instant, plus the interpolation error
// estimate when a finer interpolation basis is supplied. With a plain
// Galerkin ROM (no interpolation) the exact nonlinearity is used and the
// delta_i series is zero.
ResidualSeries primal_residuals(const SemiImplicitFom& fom, const Vector& mu,
                                const ReducedModel& rom,
                                const RomTrajectory& traj,
                                const InterpErrorIndicator* interp_err);

// Single-instant residual vectors (snapshot_index into traj.snapshot_steps),
// assembled independently of the fused series loop; used by the equivalence
// tests and the corrected output.
Vector primal_residual_full(const SemiImplicitFom& fom, const Vector& mu,
                            const ReducedModel& rom, const RomTrajectory& traj,
                            Index snapshot_index);
Vector primal_residual_interp(const SemiImplicitFom& fom, const Vector& mu,
                              const ReducedModel& rom,
                              const RomTrajectory& traj, Index snapshot_index);

// Time-averaged ratio rho = ||E (x - x_hat)|| / ||r_pr|| over the snapshot
// instants shared by both trajectories. Steps whose full residual norm falls
// below 1e-14 are skipped; if every step is skipped the estimate degenerates
// and value 1 is reported (the exact-ROM limit).
struct RhoEstimate {
    double value = 1.0;
    Index used = 0;
    Index skipped = 0;
    bool degenerate = false;
};

RhoEstimate rho_bar(const SemiImplicitFom& fom, const Vector& mu,
                    const Trajectory& fom_traj, const ReducedModel& rom,
                    const RomTrajectory& rom_traj);

// Dual-corrected outputs ybar^{k+1} = y_r^{k+1} - x_du^T r_pr^{k+1} at the
// snapshot instants (full residual, exact nonlinearity), one row per output.
struct CorrectedOutputs {
    Matrix y;                       // n_outputs x K
    std::vector<double> r_pr_norm;  // ||r_pr^{k+1}|| per instant
};

CorrectedOutputs corrected_outputs(const SemiImplicitFom& fom,
                                   const Vector& mu, const ReducedModel& rom,
                                   const RomTrajectory& traj,
                                   const DualSolution& dual);

// Assembled indicator for one parameter. delta = delta_rb + delta_i exactly;
// both components share one coefficient (the original Phi or the modified
// Psi, built from rho, the dual solution, and 1/sigma_min). For several
// outputs each row gets its own coefficient and the reported numbers are the
// worst row's.
struct ErrorReport {
    std::vector<double> delta_rb_steps, delta_i_steps;  // worst output row
    double delta_rb = 0.0;
    double delta_i = 0.0;
    double delta = 0.0;
    double rho = 1.0;
    double coefficient = 0.0;  // Phi or Psi of the worst row
    double sigma_min = 0.0;
    Matrix y_corrected;        // present when corrected outputs were supplied
    double true_error = -1.0;  // <0: no FOM data was available
    double effectivity = -1.0;
};

ErrorReport output_indicator(IndicatorMode mode, const ResidualSeries& series,
                             const DualSolution& dual, double rho,
                             double sigma_min,
                             const CorrectedOutputs* corrected = nullptr);

// Mean over snapshot instants of the output error 2-norm. y_rom has one
// column per snapshot instant (raw ROM outputs for the original indicator,
// corrected outputs for the modified one).
double true_mean_output_error(const Trajectory& fom_traj,
                              const Matrix& y_rom);

// ROM outputs at the snapshot instants, one column per instant.
Matrix outputs_at_snapshots(const RomTrajectory& traj);

}  // namespace admor
