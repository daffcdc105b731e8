#include "admor/linalg.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace admor {

SvdRule SvdRule::by_count(Index r) {
    SvdRule rule;
    rule.count = r;
    return rule;
}

SvdRule SvdRule::by_energy(double tol) {
    SvdRule rule;
    rule.energy_tol = tol;
    return rule;
}

namespace {

// Largest-magnitude entry of a column; strict comparison so the smallest
// index wins ties.
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

}  // namespace

SvdResult truncated_svd(const Matrix& M, const SvdRule& rule) {
    if (M.size() == 0) return {};

    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const Vector& all_sigma = svd.singularValues();

    // Numerical rank: LAPACK-style relative cutoff.
    const double cutoff = all_sigma.size() > 0
        ? all_sigma[0] * static_cast<double>(std::max(M.rows(), M.cols())) *
              std::numeric_limits<double>::epsilon()
        : 0.0;
    Index rank = 0;
    while (rank < all_sigma.size() && all_sigma[rank] > cutoff) ++rank;

    SvdResult out;
    out.rank = rank;
    out.sigma = all_sigma.head(rank);
    if (rank == 0) {
        out.left.resize(M.rows(), 0);
        return out;
    }

    Index keep = rank;
    if (rule.count >= 0) {
        keep = std::min(rule.count, rank);
    } else if (rule.energy_tol >= 0.0) {
        const double total = out.sigma.sum();
        double tail = total;
        keep = 0;
        while (keep < rank && tail / total >= rule.energy_tol) {
            tail -= out.sigma[keep];
            ++keep;
        }
    }

    out.left = svd.matrixU().leftCols(keep);
    for (Index j = 0; j < out.left.cols(); ++j) {
        const Index p = argmax_abs(out.left.col(j));
        if (out.left(p, j) < 0.0) out.left.col(j) = -out.left.col(j);
    }
    return out;
}

Matrix orth_extend(const Matrix& V, const Matrix& newcols,
                   double deflation_tol) {
    const Index n = V.rows() > 0 ? V.rows() : newcols.rows();
    Matrix out(n, V.cols() + newcols.cols());
    out.leftCols(V.cols()) = V;
    Index accepted = V.cols();

    for (Index j = 0; j < newcols.cols(); ++j) {
        Vector c = newcols.col(j);
        const double norm_in = c.norm();
        if (norm_in == 0.0) continue;
        // Two Gram-Schmidt passes: the second cleans up the cancellation the
        // first may have left behind.
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < accepted; ++i) {
                c.noalias() -= out.col(i).dot(c) * out.col(i);
            }
        }
        const double norm_out = c.norm();
        if (norm_out <= deflation_tol * norm_in) continue;
        out.col(accepted) = c / norm_out;
        ++accepted;
    }
    return out.leftCols(accepted);
}

struct IluPreconditioner::Impl {
    Eigen::IncompleteLUT<double> ilut;
};

IluPreconditioner::IluPreconditioner() : impl_(std::make_unique<Impl>()) {}
IluPreconditioner::~IluPreconditioner() = default;
IluPreconditioner::IluPreconditioner(IluPreconditioner&&) noexcept = default;
IluPreconditioner& IluPreconditioner::operator=(IluPreconditioner&&) noexcept =
    default;

Vector IluPreconditioner::solve(const Vector& r) const {
    return impl_->ilut.solve(r);
}

IluPreconditioner ilu_factor(const SpMatrix& A, double drop_tol,
                             int fill_factor) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("ilu_factor: matrix must be square");
    IluPreconditioner p;
    p.impl_->ilut.setDroptol(drop_tol);
    p.impl_->ilut.setFillfactor(fill_factor);
    p.impl_->ilut.compute(A);
    if (p.impl_->ilut.info() != Eigen::Success)
        throw std::runtime_error("ilu_factor: factorization failed");
    return p;
}

IterativeSolveReport gmres_solve(const SpMatrix& A, const Vector& b,
                                 const GmresOptions& opt,
                                 const IluPreconditioner* precond) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("gmres_solve: dimension mismatch");

    const Index n = b.size();
    const int restart = std::max(1, opt.restart);
    const int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * restart;
    const double bnorm = b.norm();
    const double target = opt.tol * (bnorm > 0.0 ? bnorm : 1.0);

    IterativeSolveReport rep;
    rep.x = Vector::Zero(n);
    Vector r = b;
    double rnorm = r.norm();
    if (rnorm <= target) {
        rep.residual_norm = rnorm;
        rep.converged = true;
        return rep;
    }

    // Flexible variant: preconditioned directions are kept alongside the
    // Krylov basis so the correction is assembled without a second
    // preconditioner pass.
    Matrix V(n, restart + 1);
    Matrix Z(n, restart);
    Matrix H = Matrix::Zero(restart + 1, restart);
    Vector cs(restart), sn(restart), g(restart + 1);

    int total = 0;
    while (total < max_iter) {
        V.col(0) = r / rnorm;
        g.setZero();
        g[0] = rnorm;

        int j = 0;
        for (; j < restart && total < max_iter; ++j, ++total) {
            Z.col(j) = precond ? precond->solve(V.col(j)) : V.col(j);
            Vector w = A * Z.col(j);
            for (int i = 0; i <= j; ++i) {
                H(i, j) = V.col(i).dot(w);
                w.noalias() -= H(i, j) * V.col(i);
            }
            H(j + 1, j) = w.norm();
            if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);

            // Apply the accumulated Givens rotations, then zero the new
            // subdiagonal entry with a fresh one.
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            const double denom = std::hypot(H(j, j), H(j + 1, j));
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = H(j, j) / denom;
                sn[j] = H(j + 1, j) / denom;
            }
            H(j, j) = denom;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            if (std::abs(g[j + 1]) <= target) {
                ++j;
                ++total;
                break;
            }
        }

        // Back substitution on the j x j triangular system.
        Vector y = Vector::Zero(j);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
            y[i] = s / H(i, i);
        }
        rep.x.noalias() += Z.leftCols(j) * y;

        r = b - A * rep.x;
        rnorm = r.norm();
        if (rnorm <= target) break;
    }

    rep.iterations = total;
    rep.residual_norm = (b - A * rep.x).norm();
    rep.converged = rep.residual_norm <= target;
    return rep;
}

double smallest_singular_value(const Matrix& M) {
    Eigen::BDCSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    return s.size() > 0 ? s[s.size() - 1] : 0.0;
}

double smallest_singular_value(const SpMatrix& M) {
    return smallest_singular_value(Matrix(M));
}

}  // namespace admor
