#pragma once

// Dense/sparse linear algebra shared by the reduction stack: deterministic
// truncated SVD, Gram-Schmidt basis extension, restarted GMRES with ILU
// preconditioning, and smallest-singular-value computation for desk-scale
// sparse operators.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>

namespace admor {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMatrix = Eigen::SparseMatrix<double>;

// Truncation rule for SVD-based basis selection: either a fixed column count
// or the smallest r with sum_{i>r} sigma_i / sum_i sigma_i < energy_tol
// (sums of singular values, not their squares).
struct SvdRule {
    static SvdRule by_count(Index r);
    static SvdRule by_energy(double tol);

    Index count = -1;
    double energy_tol = -1.0;
};

struct SvdResult {
    // Retained left singular vectors. Signs are normalized so that the
    // largest-magnitude entry of each column is positive (smallest index wins
    // ties), which keeps downstream interpolation indices reproducible.
    Matrix left;
    // All singular values above the numerical-rank cutoff, non-increasing.
    // left.cols() <= sigma.size(); the tail was truncated by the rule.
    Vector sigma;
    Index rank = 0;  // numerical rank of the input
};

SvdResult truncated_svd(const Matrix& M, const SvdRule& rule);

// Widens V (may have zero columns) by those columns of newcols that survive
// two-pass modified Gram-Schmidt deflation. A column is dropped when its
// orthogonalized remainder is below deflation_tol relative to its incoming
// norm. Appended columns are normalized; V's columns are assumed orthonormal.
Matrix orth_extend(const Matrix& V, const Matrix& newcols,
                   double deflation_tol = 1e-10);

// Incomplete LU with dual thresholding; thin wrapper so solver internals stay
// out of the public headers.
class IluPreconditioner {
  public:
    Vector solve(const Vector& r) const;
    ~IluPreconditioner();
    IluPreconditioner(IluPreconditioner&&) noexcept;
    IluPreconditioner& operator=(IluPreconditioner&&) noexcept;

  private:
    friend IluPreconditioner ilu_factor(const SpMatrix&, double, int);
    IluPreconditioner();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

IluPreconditioner ilu_factor(const SpMatrix& A, double drop_tol,
                             int fill_factor = 10);

struct GmresOptions {
    double tol = 1e-6;  // relative to ||b||
    int restart = 50;
    int max_iter = -1;  // defaults to 10 * restart
};

struct IterativeSolveReport {
    Vector x;
    int iterations = 0;
    double residual_norm = 0.0;  // ||b - A x||, recomputed, never estimated
    bool converged = false;
};

// Restarted GMRES with right preconditioning, so the Krylov residual matches
// the residual of the original system. On non-convergence the best iterate is
// returned with converged = false and an honest residual_norm.
IterativeSolveReport gmres_solve(const SpMatrix& A, const Vector& b,
                                 const GmresOptions& opt = {},
                                 const IluPreconditioner* precond = nullptr);

// Computed by densifying; intended for desk-scale operators (N <= a few
// thousand).
double smallest_singular_value(const SpMatrix& M);
double smallest_singular_value(const Matrix& M);

}  // namespace admor
