#include "admor/interpolation.hpp"

#include <cmath>
#include <stdexcept>

namespace admor {

namespace {

Index argmax_abs(const Vector& v) {
    Index best = 0;
    double best_abs = std::abs(v[0]);
    for (Index i = 1; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

Index argmax_col_norm(const Matrix& R) {
    Index best = 0;
    double best_sq = R.col(0).squaredNorm();
    for (Index i = 1; i < R.cols(); ++i) {
        const double s = R.col(i).squaredNorm();
        if (s > best_sq) {
            best_sq = s;
            best = i;
        }
    }
    return best;
}

}  // namespace

InterpBasis finalize_interp_basis(Matrix U, std::vector<Index> indices,
                                  InterpMethod method) {
    InterpBasis b;
    b.U = std::move(U);
    b.indices = std::move(indices);
    b.method = method;
    const Index l = b.U.cols();
    b.PtU.resize(l, l);
    for (Index i = 0; i < l; ++i) b.PtU.row(i) = b.U.row(b.indices[i]);
    if (l > 0) {
        b.PtU_lu_.compute(b.PtU);
        // A vanishing pivot means the interpolation system is unusable.
        const auto& lu_mat = b.PtU_lu_.matrixLU();
        for (Index i = 0; i < l; ++i)
            if (lu_mat(i, i) == 0.0)
                throw std::runtime_error(
                    "interpolation: singular index system (P^T U)");
    }
    return b;
}

Vector InterpBasis::coefficients(const Vector& f_at_indices) const {
    if (f_at_indices.size() != size())
        throw std::invalid_argument("InterpBasis: sample size mismatch");
    return PtU_lu_.solve(f_at_indices);
}

Vector InterpBasis::lift(const Vector& f_at_indices) const {
    return U * coefficients(f_at_indices);
}

InterpBasis InterpBasis::truncated(Index l) const {
    if (l < 0 || l > size())
        throw std::invalid_argument("InterpBasis::truncated: bad count");
    return finalize_interp_basis(
        U.leftCols(l), std::vector<Index>(indices.begin(), indices.begin() + l),
        method);
}

InterpBasis eim_build(const Matrix& F, Index max_vectors, double eps_ei) {
    if (F.size() == 0 || max_vectors < 1)
        throw std::invalid_argument("eim_build: empty pool or bad max_vectors");

    const Index n = F.rows();
    // R holds the current interpolation residual of every pool column; each
    // accepted vector zeroes one row of R, so the next residual is a rank-one
    // update away. This keeps the full-pool variant affordable.
    Matrix R = F;
    Matrix U(n, std::min<Index>(max_vectors, std::min(n, F.cols())));
    std::vector<Index> indices;

    Index l = 0;
    while (l < max_vectors && l < U.cols()) {
        const Index worst = argmax_col_norm(R);
        const double worst_norm = R.col(worst).norm();
        if (worst_norm == 0.0) break;             // pool exhausted
        if (l > 0 && worst_norm < eps_ei) break;  // converged
        const Vector eta = R.col(worst);
        const Index p = argmax_abs(eta);
        const Vector zeta = eta / eta[p];
        U.col(l) = zeta;
        indices.push_back(p);
        const Eigen::RowVectorXd row_p = R.row(p);  // copy: row p aliases R
        R.noalias() -= zeta * row_p;
        ++l;
    }
    if (l == 0) throw std::runtime_error("eim_build: zero snapshot pool");
    return finalize_interp_basis(U.leftCols(l), std::move(indices),
                                 InterpMethod::eim);
}

InterpBasis deim_build(const Matrix& F, const SvdRule& rule) {
    if (F.size() == 0) throw std::invalid_argument("deim_build: empty pool");
    const SvdResult svd = truncated_svd(F, rule);
    const Matrix& U = svd.left;
    if (U.cols() == 0) throw std::runtime_error("deim_build: zero snapshot pool");

    std::vector<Index> indices;
    indices.push_back(argmax_abs(U.col(0)));
    for (Index i = 1; i < U.cols(); ++i) {
        Matrix PtU(i, i);
        Vector rhs(i);
        for (Index r = 0; r < i; ++r) {
            PtU.row(r) = U.row(indices[static_cast<std::size_t>(r)]).head(i);
            rhs[r] = U(indices[static_cast<std::size_t>(r)], i);
        }
        const Vector c = PtU.partialPivLu().solve(rhs);
        const Vector residual = U.col(i) - U.leftCols(i) * c;
        indices.push_back(argmax_abs(residual));
    }
    return finalize_interp_basis(U, std::move(indices), InterpMethod::deim);
}

InterpBasis update_ei(const Matrix& pool, Index l_target, InterpMethod method,
                      double eps_ei) {
    if (l_target < 1) throw std::invalid_argument("update_ei: l_target < 1");
    if (method == InterpMethod::eim) return eim_build(pool, l_target, eps_ei);
    return deim_build(pool, SvdRule::by_count(l_target));
}

InterpErrorIndicator::InterpErrorIndicator(InterpBasis coarse,
                                           const InterpBasis& fine)
    : coarse_(std::move(coarse)) {
    const Index l = coarse_.size();
    const Index lf = fine.size();
    if (lf <= l)
        throw std::invalid_argument(
            "InterpErrorIndicator: fine basis must be strictly larger");
    if (fine.method != coarse_.method || fine.U.rows() != coarse_.U.rows())
        throw std::invalid_argument(
            "InterpErrorIndicator: fine basis does not extend the coarse one");
    n_coarse_ = l;

    const Matrix extra = fine.U.rightCols(lf - l);
    const auto extra_idx =
        std::vector<Index>(fine.indices.begin() + l, fine.indices.end());

    // G = (I - Pi_coarse) U'
    Matrix coarse_samples(l, extra.cols());
    for (Index r = 0; r < l; ++r)
        coarse_samples.row(r) = extra.row(coarse_.indices[static_cast<std::size_t>(r)]);
    G_ = extra;
    for (Index j = 0; j < extra.cols(); ++j)
        G_.col(j).noalias() -= coarse_.U * coarse_.coefficients(coarse_samples.col(j));

    Matrix M(extra.cols(), extra.cols());
    for (Index r = 0; r < M.rows(); ++r)
        M.row(r) = G_.row(extra_idx[static_cast<std::size_t>(r)]);
    M_lu_.compute(M);
    const auto& lu_mat = M_lu_.matrixLU();
    for (Index i = 0; i < M.rows(); ++i)
        if (lu_mat(i, i) == 0.0)
            throw std::runtime_error(
                "InterpErrorIndicator: degenerate fine extension");

    sample_idx_ = coarse_.indices;
    sample_idx_.insert(sample_idx_.end(), extra_idx.begin(), extra_idx.end());
}

Vector InterpErrorIndicator::extra_weights(const Vector& f_samples) const {
    if (f_samples.size() != static_cast<Index>(sample_idx_.size()))
        throw std::invalid_argument("InterpErrorIndicator: sample size mismatch");
    const Vector f_coarse = f_samples.head(n_coarse_);
    const Vector f_extra = f_samples.tail(f_samples.size() - n_coarse_);
    // P'^T (I - Pi_coarse) f = f[extra] - U[extra,:] c with the coarse
    // interpolation coefficients c; U[extra,:] rows are exactly the rows of
    // the coarse-basis matrix at the extra indices.
    const Vector c = coarse_.coefficients(f_coarse);
    Vector rhs = f_extra;
    for (Index r = 0; r < rhs.size(); ++r)
        rhs[r] -= coarse_.U.row(sample_idx_[static_cast<std::size_t>(n_coarse_ + r)]).dot(c);
    return M_lu_.solve(rhs);
}

double InterpErrorIndicator::delta_norm(const Vector& f_samples) const {
    return (G_ * extra_weights(f_samples)).norm();
}

Vector InterpErrorIndicator::delta(const Vector& f_samples) const {
    return G_ * extra_weights(f_samples);
}

}  // namespace admor
