#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/fom.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

using namespace admor;

namespace {

Vector random_state(Index n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-0.5, 1.5);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = dist(gen);
    return x;
}

// Dense replay of one semi-implicit step, independent of simulate_fom.
Vector dense_step(const SemiImplicitFom& fom, const Vector& mu,
                  const Vector& x, double t) {
    const Matrix E = Matrix(fom.E(mu));
    const Vector rhs = Matrix(fom.A(mu)) * x + fom.dt * fom.f(x, mu) +
                       fom.dt * (fom.B * fom.input(t, mu));
    return E.lu().solve(rhs);
}

void check_restricted_f(const SemiImplicitFom& fom, const Vector& mu,
                        unsigned seed) {
    const Vector x = random_state(fom.n, seed);
    const Vector full = fom.f(x, mu);
    std::vector<Index> rows{0, fom.n / 3, fom.n / 2, fom.n - 1};
    const Vector restricted = fom.f_rows(x, mu, rows);
    REQUIRE(restricted.size() == static_cast<Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        CHECK(std::abs(restricted[static_cast<Index>(i)] - full[rows[i]]) <=
              1e-14 * (1.0 + std::abs(full[rows[i]])));
    // The stencil closure always covers the requested rows.
    const std::vector<Index> closure = fom.stencil(rows);
    for (Index r : rows)
        CHECK(std::find(closure.begin(), closure.end(), r) != closure.end());
}

}  // namespace

TEST_CASE("log-uniform training points hit the endpoints with constant ratio") {
    const TrainingSet xi = log_uniform_points_1d(0.0005, 1.0, 100);
    REQUIRE(xi.size() == 100);
    CHECK(std::abs(xi.front()[0] - 0.0005) < 1e-15);
    CHECK(std::abs(xi.back()[0] - 1.0) < 1e-12);
    const double ratio = xi[1][0] / xi[0][0];
    for (size_t i = 2; i < xi.size(); ++i)
        CHECK(std::abs(xi[i][0] / xi[i - 1][0] - ratio) < 1e-10 * ratio);
}

TEST_CASE("2-d grid covers the box corners") {
    Box box;
    box.lo = Vector(2), box.hi = Vector(2);
    box.lo << 0.0667, 0.5;
    box.hi << 0.1667, 2.0;
    const TrainingSet xi = uniform_grid_2d(box, 6, 10);
    REQUIRE(xi.size() == 60);
    CHECK((xi.front() - box.lo).norm() < 1e-15);
    CHECK((xi.back() - box.hi).norm() < 1e-15);
    for (const Vector& p : xi) CHECK(box.contains(p));
}

TEST_CASE("Burgers trajectory shapes and snapshot bookkeeping") {
    const SemiImplicitFom fom = make_burgers_fom(64, 1e-3, 0.1, 0.01, 1.0, 10);
    CHECK(fom.model_id == "burgers");
    CHECK(fom.domain.dim() == 1);
    Vector mu(1);
    mu << 0.05;
    const Trajectory traj = simulate_fom(fom, mu);
    const Index steps = fom.step_count(mu);
    REQUIRE(steps == 100);
    CHECK(traj.outputs.cols() == steps + 1);
    CHECK(traj.states.cols() == steps / 10);
    CHECK(traj.states.rows() == fom.n);
    REQUIRE(traj.snapshot_steps.size() == 10);
    for (size_t j = 0; j < traj.snapshot_steps.size(); ++j)
        CHECK(traj.snapshot_steps[j] == 10 * static_cast<Index>(j + 1));
    // Nonlinear snapshots are f evaluated at the stored states.
    for (Index j = 0; j < traj.states.cols(); ++j)
        CHECK((traj.f_snapshots.col(j) - fom.f(traj.states.col(j), mu))
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
}

TEST_CASE("semi-implicit stepping matches a dense replay") {
    const SemiImplicitFom fom = make_burgers_fom(32, 2e-3, 0.02, 0.01, 1.0, 1);
    Vector mu(1);
    mu << 0.2;
    const Trajectory traj = simulate_fom(fom, mu);
    REQUIRE(traj.states.cols() == 10);

    // x^0 = 0; every stored state is one dense step from its predecessor.
    Vector x = Vector::Zero(fom.n);
    for (Index k = 0; k < traj.states.cols(); ++k) {
        x = dense_step(fom, mu, x, static_cast<double>(k) * fom.dt);
        CHECK((x - traj.states.col(k)).norm() <= 1e-12 * (1.0 + x.norm()));
    }
    // Outputs are C x at every step.
    CHECK((traj.outputs.col(traj.states.cols()) - fom.C * x).norm() < 1e-12);
    CHECK(traj.outputs.col(0).norm() == 0.0);
}

TEST_CASE("Burgers viscosity damps the solution") {
    const SemiImplicitFom fom = make_burgers_fom(64, 1e-3, 0.3, 0.001, 1.0, 30);
    Vector lo(1), hi(1);
    lo << 0.002;
    hi << 0.9;
    const Trajectory visc = simulate_fom(fom, hi);
    const Trajectory sharp = simulate_fom(fom, lo);
    // High viscosity dissipates more energy by the final snapshot.
    CHECK(visc.states.rightCols(1).norm() < sharp.states.rightCols(1).norm());
    CHECK(visc.states.allFinite());
    CHECK(sharp.states.allFinite());
}

TEST_CASE("restricted nonlinearity agrees with the full one on all models") {
    const SemiImplicitFom burgers =
        make_burgers_fom(48, 1e-3, 0.05, 0.01, 1.0, 5);
    Vector mu_b(1);
    mu_b << 0.1;
    check_restricted_f(burgers, mu_b, 17);

    const SemiImplicitFom chrom =
        make_chromatography_fom(64, 2e-3, ChromatographyCoefficients{}, 10);
    Vector mu_c(2);
    mu_c << 0.1, 1.0;
    check_restricted_f(chrom, mu_c, 18);

    const SemiImplicitFom rd = make_reaction_diffusion_fom(40, 1e-3, 0.1, 5);
    check_restricted_f(rd, Vector(0), 19);
}

TEST_CASE("chromatography model layout and horizon scaling") {
    const SemiImplicitFom fom =
        make_chromatography_fom(64, 2e-3, ChromatographyCoefficients{}, 10);
    CHECK(fom.model_id == "chromatography");
    CHECK(fom.n == 64);
    CHECK(fom.n_outputs == 2);
    CHECK(fom.domain.dim() == 2);
    // Horizon shrinks with the flow rate.
    Vector slow(2), fast(2);
    slow << fom.domain.lo[0], 1.0;
    fast << fom.domain.hi[0], 1.0;
    CHECK(fom.step_count(slow) > fom.step_count(fast));

    const Trajectory traj = simulate_fom(fom, fast);
    CHECK(traj.states.allFinite());
    CHECK(traj.outputs.allFinite());
    // The feed pulse eventually reaches the outlet.
    CHECK(traj.outputs.cwiseAbs().maxCoeff() > 1e-8);

    CHECK_THROWS(make_chromatography_fom(63, 2e-3,
                                         ChromatographyCoefficients{}, 10));
}

TEST_CASE("reaction-diffusion model is non-parametric") {
    const SemiImplicitFom fom = make_reaction_diffusion_fom(40, 1e-3, 0.2, 10);
    CHECK(fom.model_id == "reaction-diffusion");
    CHECK(fom.domain.dim() == 0);
    const Trajectory traj = simulate_fom(fom, Vector(0));
    CHECK(traj.states.allFinite());
    CHECK(traj.states.cols() == fom.step_count(Vector(0)) / 10);
    // The operators do not depend on any parameter argument.
    const Matrix E = Matrix(fom.E(Vector(0)));
    CHECK(E.rows() == fom.n);
}

TEST_CASE("simulation rejects out-of-domain parameters") {
    const SemiImplicitFom fom = make_burgers_fom(32, 1e-3, 0.05, 0.01, 1.0, 5);
    Vector bad(1);
    bad << 2.0;
    CHECK_THROWS(simulate_fom(fom, bad));
    CHECK_THROWS(simulate_fom(fom, Vector(0)));
}
