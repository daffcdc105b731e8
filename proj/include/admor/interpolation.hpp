#pragma once

// Empirical interpolation of nonlinear snapshot pools: EIM (greedy residual
// basis) and DEIM (POD basis with greedily grown indices), interpolation
// application, and the two-level interpolation error indicator used for the
// basis-size adaptation.

#include "admor/linalg.hpp"

#include <vector>

namespace admor {

enum class InterpMethod { eim, deim };

struct InterpBasis {
    Matrix U;                    // N x l interpolation vectors
    std::vector<Index> indices;  // l distinct row indices, selection order
    InterpMethod method = InterpMethod::eim;
    Matrix PtU;  // U sampled at `indices`; unit lower-triangular for EIM

    Index size() const { return U.cols(); }

    // Solves (P^T U) c = f_at_indices; lift additionally applies U.
    Vector coefficients(const Vector& f_at_indices) const;
    Vector lift(const Vector& f_at_indices) const;

    // Prefix truncation; both builders grow bases in a nested fashion.
    InterpBasis truncated(Index l) const;

  private:
    friend InterpBasis finalize_interp_basis(Matrix U,
                                             std::vector<Index> indices,
                                             InterpMethod method);
    Eigen::PartialPivLU<Matrix> PtU_lu_;
};

// Assembles a basis from its raw parts (builder output or a deserialized
// manifest), recomputing the sampled-rows factorization.
InterpBasis finalize_interp_basis(Matrix U, std::vector<Index> indices,
                                  InterpMethod method);

// Greedy EIM: the first vector is the max-norm pool column normalized at its
// largest-magnitude entry; each later vector is the normalized interpolation
// residual of the worst-approximated column. Stops at max_vectors columns,
// when the worst residual norm drops below eps_ei, or when the pool is
// exhausted. Ties in any argmax go to the smallest index.
InterpBasis eim_build(const Matrix& F, Index max_vectors, double eps_ei);

// DEIM: basis = truncated left singular vectors of F; indices grown by the
// max-abs entry of each successive vector's interpolation residual.
InterpBasis deim_build(const Matrix& F, const SvdRule& rule);

// Rebuilds the interpolation basis of size min(l_target, achievable) from
// the pooled snapshots. eps_ei only applies to the EIM path.
InterpBasis update_ei(const Matrix& pool, Index l_target, InterpMethod method,
                      double eps_ei);

// Estimator of the interpolation error (I - Pi_coarse) f obtained by
// projecting onto the directions the fine basis adds beyond the coarse one:
//
//   Delta_I = G M^{-1} P'^T (I - Pi_coarse) f,
//   G = (I - Pi_coarse) U',   M = P'^T G,
//
// where U' and P' are the fine basis' extra columns and indices. Only the
// entries of f at the fine basis' indices (coarse set plus extras) are
// needed.
class InterpErrorIndicator {
  public:
    // fine must extend coarse: same construction, strictly more columns.
    InterpErrorIndicator(InterpBasis coarse, const InterpBasis& fine);

    // f sampled at sample_indices(), in that order.
    const std::vector<Index>& sample_indices() const { return sample_idx_; }
    double delta_norm(const Vector& f_samples) const;
    Vector delta(const Vector& f_samples) const;  // full-dimension vector

    const InterpBasis& coarse() const { return coarse_; }

  private:
    Vector extra_weights(const Vector& f_samples) const;

    InterpBasis coarse_;
    Matrix G_;
    Eigen::PartialPivLU<Matrix> M_lu_;
    std::vector<Index> sample_idx_;
    Index n_coarse_ = 0;
};

}  // namespace admor
