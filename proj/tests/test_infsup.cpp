#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/infsup.hpp"

#include <cmath>

using namespace admor;

namespace {

// Builder whose smallest singular value is exp(-2 mu0) exactly: a diagonal
// with that value in one slot and larger entries elsewhere.
SpMatrix diag_builder_1d(const Vector& mu) {
    const Index n = 6;
    std::vector<Eigen::Triplet<double>> t;
    t.emplace_back(0, 0, std::exp(-2.0 * mu[0]));
    for (Index i = 1; i < n; ++i)
        t.emplace_back(i, i, 3.0 + static_cast<double>(i));
    SpMatrix M(n, n);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

SpMatrix diag_builder_2d(const Vector& mu) {
    const Index n = 5;
    std::vector<Eigen::Triplet<double>> t;
    t.emplace_back(0, 0, std::exp(-(mu[0] + 0.5 * mu[1])));
    for (Index i = 1; i < n; ++i) t.emplace_back(i, i, 10.0);
    SpMatrix M(n, n);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

TrainingSet line_points(double lo, double hi, Index count) {
    TrainingSet xi;
    for (Index i = 0; i < count; ++i) {
        const double w = static_cast<double>(i) / static_cast<double>(count - 1);
        xi.push_back(Vector::Constant(1, lo + w * (hi - lo)));
    }
    return xi;
}

}  // namespace

TEST_CASE("surrogate interpolates the stability constant at its centers") {
    const TrainingSet xi = line_points(0.1, 2.0, 40);
    const InfSupSurrogate s = build_infsup_surrogate(xi, diag_builder_1d);
    REQUIRE(!s.centers.empty());
    for (size_t j = 0; j < s.centers.size(); ++j) {
        const double exact = std::exp(-2.0 * s.centers[j][0]);
        CHECK(std::abs(s.eval(s.centers[j]) - exact) <= 1e-8 * exact);
    }
    CHECK(!s.change_history.empty());
}

TEST_CASE("surrogate tracks a smooth log-linear constant closely") {
    const TrainingSet xi = line_points(0.1, 2.0, 60);
    const InfSupSurrogate s =
        build_infsup_surrogate(xi, diag_builder_1d, 0, 1e-3, 30);
    double worst = 0.0;
    for (const Vector& mu : xi) {
        const double exact = std::exp(-2.0 * mu[0]);
        worst = std::max(worst, std::abs(s.eval(mu) - exact) / exact);
    }
    // log sigma_min is linear in mu, which thin-plate splines with a linear
    // tail reproduce essentially exactly.
    CHECK(worst < 1e-6);
    // Positivity everywhere, by construction.
    for (const Vector& mu : xi) CHECK(s.eval(mu) > 0.0);
}

TEST_CASE("two-parameter surrogate stays within a few percent") {
    Box box;
    box.lo = Vector(2), box.hi = Vector(2);
    box.lo << 0.0, 0.0;
    box.hi << 1.5, 2.0;
    const TrainingSet xi = uniform_grid_2d(box, 7, 7);
    const InfSupSurrogate s =
        build_infsup_surrogate(xi, diag_builder_2d, 0, 1e-3, 25);
    double worst = 0.0;
    for (const Vector& mu : xi) {
        const double exact = std::exp(-(mu[0] + 0.5 * mu[1]));
        worst = std::max(worst, std::abs(s.eval(mu) - exact) / exact);
    }
    CHECK(worst < 0.02);
}

TEST_CASE("center budget is respected and reported") {
    const TrainingSet xi = line_points(0.1, 2.0, 50);
    const InfSupSurrogate s =
        build_infsup_surrogate(xi, diag_builder_1d, 4, 1e-18, 6);
    CHECK(s.centers.size() <= 6);
    CHECK(s.hit_max_centers);
}

TEST_CASE("degenerate domains and inputs") {
    // Non-parametric model: a single constant value.
    TrainingSet xi0{Vector(0)};
    const InfSupSurrogate s0 = build_infsup_surrogate(xi0, [](const Vector&) {
        SpMatrix M(3, 3);
        M.setIdentity();
        return SpMatrix(2.5 * M);
    });
    CHECK(std::abs(s0.eval(Vector(0)) - 2.5) < 1e-12);

    // A singular operator is refused with a parameter-naming message.
    const TrainingSet xi = line_points(0.1, 1.0, 8);
    CHECK_THROWS(build_infsup_surrogate(xi, [](const Vector&) {
        SpMatrix M(3, 3);  // all zero
        return M;
    }));

    // An empty training set cannot seed anything.
    CHECK_THROWS(build_infsup_surrogate(TrainingSet{}, diag_builder_1d));
}

TEST_CASE("evaluation away from centers stays within the sampled range shape") {
    const TrainingSet xi = line_points(0.2, 1.0, 30);
    const InfSupSurrogate s = build_infsup_surrogate(xi, diag_builder_1d);
    // Monotone data: the surrogate keeps the ordering of far-apart queries.
    CHECK(s.eval(Vector::Constant(1, 0.25)) > s.eval(Vector::Constant(1, 0.95)));
}
