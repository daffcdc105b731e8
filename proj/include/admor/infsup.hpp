#pragma once

// Radial-basis-function surrogate for the smallest singular value of the
// parametric implicit operator: thin-plate-spline interpolation of
// log sigma_min over a greedily enriched set of centers, so the indicator
// sweep never has to compute a full SVD per parameter.

#include "admor/fom.hpp"
#include "admor/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace admor {

struct InfSupSurrogate {
    std::vector<Vector> centers;  // enriched coarse subset of the training set
    Vector values;                // sigma_min at the centers
    std::string kernel = "thin-plate-spline+linear";
    // Interpolation weights in log space: one per center, then the constant
    // and linear polynomial tail (d+1 entries).
    Vector weights;
    // Axis scaling applied before distances are measured.
    Vector scale_lo, scale_hi;
    // L-infinity relative change of the surrogate over the training set per
    // enrichment step.
    std::vector<double> change_history;
    bool hit_max_centers = false;

    // Positive estimate of sigma_min(E(mu)).
    double eval(const Vector& mu) const;
};

// Greedy build: fit on an initial coarse set (domain corners and center
// snapped to training points, padded to n_coarse), then repeatedly add the
// training point maximizing |s(mu) - s(nearest center)| * dist(mu, centers)
// until the surrogate stops changing (relative L-infinity below tol_change)
// or max_centers is reached. n_coarse <= 0 selects max(d+1, 4).
InfSupSurrogate build_infsup_surrogate(
    const TrainingSet& xi,
    const std::function<SpMatrix(const Vector& mu)>& matrix_builder,
    Index n_coarse = 0, double tol_change = 1e-2, Index max_centers = 40);

}  // namespace admor
