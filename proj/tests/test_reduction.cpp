#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/reduction.hpp"

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

// Small non-parametric FOM with a cubic nonlinearity whose stencil is the
// point itself; closed form enough to reason about, rich enough to exercise
// reduced coupling and stencil plumbing.
SemiImplicitFom toy_fom(Index n, double dt, Index steps, Index stride) {
    SemiImplicitFom fom;
    fom.model_id = "toy-cubic";
    fom.n = n;
    fom.n_outputs = 1;
    fom.n_inputs = 1;
    fom.dt = dt;
    fom.steps = steps;
    fom.snapshot_stride = stride;
    fom.parametric_operator = false;

    std::vector<Eigen::Triplet<double>> te, ta;
    for (Index i = 0; i < n; ++i) {
        te.emplace_back(i, i, 1.0 + 0.05 * static_cast<double>(i % 3));
        ta.emplace_back(i, i, 0.97);
        if (i > 0) ta.emplace_back(i, i - 1, 0.015);
        if (i + 1 < n) ta.emplace_back(i, i + 1, 0.015);
    }
    SpMatrix E(n, n), A(n, n);
    E.setFromTriplets(te.begin(), te.end());
    A.setFromTriplets(ta.begin(), ta.end());
    fom.E = [E](const Vector&) { return E; };
    fom.A = [A](const Vector&) { return A; };

    SpMatrix B(n, 1);
    std::vector<Eigen::Triplet<double>> tb;
    for (Index i = 0; i < n; ++i)
        tb.emplace_back(i, 0, std::sin(0.2 * static_cast<double>(i) + 0.3));
    B.setFromTriplets(tb.begin(), tb.end());
    fom.B = B;
    fom.C = Matrix::Ones(1, n) / static_cast<double>(n);
    fom.input = [](double t, const Vector&) {
        Vector u(1);
        u[0] = std::cos(3.0 * t);
        return u;
    };
    fom.f = [](const Vector& x, const Vector&) {
        return Vector(0.4 * x.array().cube());
    };
    fom.f_rows = [](const Vector& x, const Vector&,
                    const std::vector<Index>& rows) {
        Vector out(static_cast<Index>(rows.size()));
        for (size_t i = 0; i < rows.size(); ++i)
            out[static_cast<Index>(i)] = 0.4 * std::pow(x[rows[i]], 3);
        return out;
    };
    fom.stencil = [](const std::vector<Index>& rows) { return rows; };
    return fom;
}

}  // namespace

TEST_CASE("POD extracts the dominant direction of planted snapshots") {
    const Index n = 30;
    Matrix U = random_matrix(n, 2, 3);
    U = Eigen::HouseholderQR<Matrix>(U).householderQ() * Matrix::Identity(n, 2);
    Matrix weights(2, 12);
    weights.row(0) = 10.0 * random_matrix(1, 12, 4);
    weights.row(1) = 0.1 * random_matrix(1, 12, 5);
    const Matrix X = U * weights;

    const ReducedBasis rb = pod(X, SvdRule::by_count(1));
    REQUIRE(rb.size() == 1);
    CHECK(std::abs(rb.V.col(0).dot(U.col(0))) > 0.999);
    // Energy rule with a tiny cutoff recovers the planted rank.
    CHECK(pod(X, SvdRule::by_energy(1e-8)).size() == 2);
}

TEST_CASE("full-span Galerkin ROM replays the FOM exactly") {
    const SemiImplicitFom fom = toy_fom(8, 1e-2, 60, 5);
    const Trajectory traj = simulate_fom(fom, Vector(0));

    const ReducedBasis rb = pod(traj.states, SvdRule::by_count(8));
    REQUIRE(rb.size() == 8);
    const ReducedModel rom = project_rom(fom, rb, std::nullopt);
    const RomTrajectory rt = simulate_rom(rom, Vector(0));
    REQUIRE(rt.stable);

    for (size_t j = 0; j < traj.snapshot_steps.size(); ++j) {
        const Vector lifted =
            rt.state_at_step(rom.V, traj.snapshot_steps[j]);
        CHECK((lifted - traj.states.col(static_cast<Index>(j))).norm() <
              1e-10);
    }
    CHECK((rt.outputs - traj.outputs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("interpolated ROM matches Galerkin for an in-span nonlinearity") {
    const SemiImplicitFom fom = toy_fom(8, 1e-2, 40, 4);
    const Trajectory traj = simulate_fom(fom, Vector(0));
    const ReducedBasis rb = pod(traj.states, SvdRule::by_count(8));

    // With l_EI = n the interpolation operator is exact for every vector.
    const InterpBasis interp =
        update_ei(traj.f_snapshots, 8, InterpMethod::deim, 0.0);
    REQUIRE(interp.size() == 8);
    const ReducedModel galerkin = project_rom(fom, rb, std::nullopt);
    const ReducedModel hyper = project_rom(fom, rb, interp);
    const RomTrajectory a = simulate_rom(galerkin, Vector(0));
    const RomTrajectory b = simulate_rom(hyper, Vector(0));
    REQUIRE(a.stable);
    REQUIRE(b.stable);
    CHECK((a.outputs - b.outputs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reduced operators are cached for non-parametric models") {
    const SemiImplicitFom fom = toy_fom(10, 1e-2, 10, 2);
    const Trajectory traj = simulate_fom(fom, Vector(0));
    const ReducedBasis rb = pod(traj.states, SvdRule::by_count(3));
    const ReducedModel rom = project_rom(fom, rb, std::nullopt);
    REQUIRE(rom.E_r_fixed.has_value());
    REQUIRE(rom.A_r_fixed.has_value());
    const Matrix ref = rom.V.transpose() * Matrix(fom.E(Vector(0))) * rom.V;
    CHECK((rom.E_r(Vector(0)) - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("ROM flags a blow-up instead of throwing") {
    SemiImplicitFom fom = toy_fom(6, 1e-2, 400, 10);
    // Make the explicit side strongly expansive so the cubic term blows up.
    std::vector<Eigen::Triplet<double>> ta;
    for (Index i = 0; i < 6; ++i) ta.emplace_back(i, i, 2.5);
    SpMatrix A(6, 6);
    A.setFromTriplets(ta.begin(), ta.end());
    fom.A = [A](const Vector&) { return A; };

    const ReducedBasis rb{Matrix::Identity(6, 6), {}};
    const ReducedModel rom = project_rom(fom, rb, std::nullopt);
    const RomTrajectory rt = simulate_rom(rom, Vector(0));
    CHECK_FALSE(rt.stable);
    CHECK(rt.failed_step >= 0);
}

TEST_CASE("angle-based snapshot thinning") {
    const Index n = 15;
    Vector a = random_matrix(n, 1, 7).col(0).normalized();
    Vector b = random_matrix(n, 1, 8).col(0);
    b = (b - a.dot(b) * a).normalized();  // exactly orthogonal to a

    Matrix X(n, 5);
    X.col(0) = a;
    X.col(1) = 2.0 * a;              // parallel: dropped
    X.col(2) = Vector::Zero(n);      // zero: dropped, counted separately
    X.col(3) = b;                    // orthogonal: kept
    X.col(4) = b + 1e-9 * a;         // nearly parallel to the last kept one
    const AdssResult r = adss_filter(X, 0.05);
    CHECK(r.skipped_zero == 1);
    REQUIRE(r.kept.size() == 2);
    CHECK(r.kept[0] == 0);
    CHECK(r.kept[1] == 3);
    CHECK(r.thinned.cols() == 2);
    CHECK((r.thinned.col(1) - b).norm() < 1e-14);

    // Looser tolerance keeps at most as many columns.
    CHECK(adss_filter(X, 0.5).kept.size() <= r.kept.size());
    // Thinning is only defined for tolerances in (0,1); 0 disables it at the
    // call site instead.
    CHECK_THROWS(adss_filter(X, 0.0));
    CHECK_THROWS(adss_filter(X, 1.5));
}
