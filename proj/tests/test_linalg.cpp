#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace admor;

namespace {

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist;
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = dist(gen);
    return M;
}

// Product of Givens rotations: an explicit orthogonal matrix that does not
// depend on any SVD routine.
Matrix rotation3(double a, double b) {
    Matrix R1 = Matrix::Identity(3, 3), R2 = Matrix::Identity(3, 3);
    R1(0, 0) = std::cos(a), R1(0, 1) = -std::sin(a);
    R1(1, 0) = std::sin(a), R1(1, 1) = std::cos(a);
    R2(1, 1) = std::cos(b), R2(1, 2) = -std::sin(b);
    R2(2, 1) = std::sin(b), R2(2, 2) = std::cos(b);
    return R1 * R2;
}

// 1-D convection-diffusion stencil: nonsymmetric, well conditioned, sparse.
SpMatrix convdiff(Index n) {
    std::vector<Eigen::Triplet<double>> t;
    for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.5);
        if (i > 0) t.emplace_back(i, i - 1, -1.5);
        if (i + 1 < n) t.emplace_back(i, i + 1, -0.5);
    }
    SpMatrix A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

}  // namespace

TEST_CASE("truncated SVD recovers known singular values") {
    // M = U diag(4, 1, 0.25) V^T with hand-built rotations.
    const Matrix U = rotation3(0.3, 1.1);
    const Matrix V = rotation3(-0.7, 0.4);
    Vector s(3);
    s << 4.0, 1.0, 0.25;
    const Matrix M = U * s.asDiagonal() * V.transpose();

    const SvdResult full = truncated_svd(M, SvdRule::by_count(3));
    REQUIRE(full.rank == 3);
    CHECK(std::abs(full.sigma[0] - 4.0) < 1e-12);
    CHECK(std::abs(full.sigma[1] - 1.0) < 1e-12);
    CHECK(std::abs(full.sigma[2] - 0.25) < 1e-12);
    CHECK((full.left.transpose() * full.left - Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("energy truncation keeps the smallest rank with tail below eps") {
    // Tail fractions of (4, 1, 0.25): after r=1 keep 1.25/5.25 = 0.2381,
    // after r=2 keep 0.25/5.25 = 0.0476 (sums of sigma, not sigma^2).
    const Matrix U = rotation3(0.9, -0.2);
    const Matrix V = rotation3(0.1, 0.5);
    Vector s(3);
    s << 4.0, 1.0, 0.25;
    const Matrix M = U * s.asDiagonal() * V.transpose();

    // rank reports the numerical rank; the rule decides the retained columns.
    CHECK(truncated_svd(M, SvdRule::by_energy(0.25)).left.cols() == 1);
    CHECK(truncated_svd(M, SvdRule::by_energy(0.10)).left.cols() == 2);
    CHECK(truncated_svd(M, SvdRule::by_energy(0.01)).left.cols() == 3);
    CHECK(truncated_svd(M, SvdRule::by_energy(0.25)).rank == 3);
}

TEST_CASE("SVD sign convention and count cap") {
    const Matrix M = random_matrix(12, 5, 7);
    const SvdResult r = truncated_svd(M, SvdRule::by_count(50));
    CHECK(r.rank == 5);
    for (Index j = 0; j < r.rank; ++j) {
        Index argmax = 0;
        r.left.col(j).cwiseAbs().maxCoeff(&argmax);
        CHECK(r.left(argmax, j) > 0.0);
    }
    // Descending, nonnegative spectrum.
    for (Index j = 1; j < r.rank; ++j) CHECK(r.sigma[j] <= r.sigma[j - 1]);
    CHECK(r.sigma[r.rank - 1] >= 0.0);
    // Projection onto all left vectors reproduces M.
    CHECK((r.left * (r.left.transpose() * M) - M).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("orth_extend grows an orthonormal basis and deflates duplicates") {
    const Matrix X = random_matrix(20, 3, 11);
    Matrix V = orth_extend(Matrix(20, 0), X);
    REQUIRE(V.cols() == 3);
    CHECK((V.transpose() * V - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);

    // Re-adding spanned directions changes nothing.
    Matrix again = orth_extend(V, X);
    CHECK(again.cols() == 3);
    // A spanned vector plus a tiny perturbation is still deflated.
    Matrix near = V.col(0) + 1e-13 * V.col(1);
    CHECK(orth_extend(V, near).cols() == 3);
    // A genuinely new direction survives.
    Matrix fresh = random_matrix(20, 1, 99);
    Matrix wider = orth_extend(V, fresh);
    REQUIRE(wider.cols() == 4);
    CHECK((wider.transpose() * wider - Matrix::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    // Existing columns are untouched.
    CHECK((wider.leftCols(3) - V).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("GMRES with ILU solves a sparse system and reports an honest residual") {
    const Index n = 200;
    const SpMatrix A = convdiff(n);
    const Vector b = random_matrix(n, 1, 3).col(0);

    const IluPreconditioner ilu = ilu_factor(A, 1e-3);
    GmresOptions opt;
    opt.tol = 1e-10;
    const IterativeSolveReport rep = gmres_solve(A, b, opt, &ilu);
    REQUIRE(rep.converged);
    const double actual = (b - A * rep.x).norm() / b.norm();
    CHECK(actual <= 1e-10);
    CHECK(std::abs(rep.residual_norm - actual) <= 1e-14 + 1e-8 * actual);
}

TEST_CASE("GMRES restarts still converge without a preconditioner") {
    const Index n = 120;
    const SpMatrix A = convdiff(n);
    const Vector b = Vector::Ones(n);
    GmresOptions opt;
    opt.tol = 1e-8;
    opt.restart = 5;
    opt.max_iter = 4000;
    const IterativeSolveReport rep = gmres_solve(A, b, opt, nullptr);
    REQUIRE(rep.converged);
    CHECK((b - A * rep.x).norm() / b.norm() <= 1e-8);
}

TEST_CASE("smallest singular value matches a dense reference") {
    const Index n = 40;
    const SpMatrix A = convdiff(n);
    const Matrix Ad = Matrix(A);
    Eigen::JacobiSVD<Matrix> svd(Ad);
    const double ref = svd.singularValues().minCoeff();

    CHECK(std::abs(smallest_singular_value(A) - ref) <= 1e-8 * ref);
    CHECK(std::abs(smallest_singular_value(Ad) - ref) <= 1e-8 * ref);

    // Diagonal oracle.
    Matrix D = Matrix::Zero(4, 4);
    D.diagonal() << 3.0, 0.5, 7.0, 1.5;
    CHECK(std::abs(smallest_singular_value(D) - 0.5) < 1e-12);
}
