#include "admor/infsup.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace admor {

namespace {

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

Vector normalize(const Vector& mu, const Vector& lo, const Vector& hi) {
    Vector out(mu.size());
    for (Index i = 0; i < mu.size(); ++i) {
        const double span = hi[i] - lo[i];
        out[i] = span > 0.0 ? (mu[i] - lo[i]) / span : 0.0;
    }
    return out;
}

// Interpolation system for log sigma_min: TPS kernel block plus a linear
// polynomial tail, [Phi P; P^T 0] [w; v] = [g; 0].
Vector fit_weights(const std::vector<Vector>& centers_scaled,
                   const Vector& log_values) {
    const Index n = static_cast<Index>(centers_scaled.size());
    const Index d = centers_scaled.empty() ? 0 : centers_scaled[0].size();
    const Index size = n + d + 1;
    Matrix K = Matrix::Zero(size, size);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j)
            K(i, j) = tps_kernel((centers_scaled[i] - centers_scaled[j]).norm());
        K(i, n) = 1.0;
        K(n, i) = 1.0;
        for (Index a = 0; a < d; ++a) {
            K(i, n + 1 + a) = centers_scaled[i][a];
            K(n + 1 + a, i) = centers_scaled[i][a];
        }
    }
    Vector rhs = Vector::Zero(size);
    rhs.head(n) = log_values;

    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) {
        const double jitter =
            1e-10 * std::max(1.0, K.cwiseAbs().maxCoeff());
        for (Index i = 0; i < n; ++i) K(i, i) += jitter;
        lu.compute(K);
        if (!lu.isInvertible())
            throw std::runtime_error(
                "singular RBF kernel matrix (after jitter retry); centers "
                "may coincide");
    }
    return lu.solve(rhs);
}

double eval_scaled(const std::vector<Vector>& centers_scaled,
                   const Vector& weights, const Vector& mu_scaled) {
    const Index n = static_cast<Index>(centers_scaled.size());
    const Index d = mu_scaled.size();
    double s = weights[n];
    for (Index a = 0; a < d; ++a) s += weights[n + 1 + a] * mu_scaled[a];
    for (Index i = 0; i < n; ++i)
        s += weights[i] * tps_kernel((centers_scaled[i] - mu_scaled).norm());
    return s;
}

std::string format_mu(const Vector& mu) {
    std::ostringstream os;
    os << "(";
    for (Index i = 0; i < mu.size(); ++i)
        os << (i ? ", " : "") << mu[i];
    os << ")";
    return os.str();
}

}  // namespace

double InfSupSurrogate::eval(const Vector& mu) const {
    if (centers.empty())
        throw std::logic_error("surrogate has no centers");
    if (mu.size() == 0 || centers.size() == 1)
        return values[0];
    std::vector<Vector> scaled;
    scaled.reserve(centers.size());
    for (const Vector& c : centers)
        scaled.push_back(normalize(c, scale_lo, scale_hi));
    return std::exp(
        eval_scaled(scaled, weights, normalize(mu, scale_lo, scale_hi)));
}

InfSupSurrogate build_infsup_surrogate(
    const TrainingSet& xi,
    const std::function<SpMatrix(const Vector& mu)>& matrix_builder,
    Index n_coarse, double tol_change, Index max_centers) {
    if (xi.empty()) throw std::invalid_argument("empty training set");
    const Index d = xi[0].size();

    InfSupSurrogate s;

    const auto solve_sigma = [&](const Vector& mu) {
        const double val = smallest_singular_value(matrix_builder(mu));
        if (!(val > 0.0))
            throw std::runtime_error("sigma_min is zero at mu = " +
                                     format_mu(mu) +
                                     "; log-space interpolation undefined");
        return val;
    };

    // Parameter-free operator: the response is a single constant.
    if (d == 0) {
        s.centers.push_back(xi[0]);
        s.values = Vector::Constant(1, solve_sigma(xi[0]));
        s.scale_lo = s.scale_hi = Vector(0);
        return s;
    }

    if (n_coarse <= 0) n_coarse = std::max<Index>(d + 1, 4);
    if (n_coarse < d + 1)
        throw std::invalid_argument("n_coarse must be at least d + 1");

    s.scale_lo = xi[0];
    s.scale_hi = xi[0];
    for (const Vector& mu : xi) {
        s.scale_lo = s.scale_lo.cwiseMin(mu);
        s.scale_hi = s.scale_hi.cwiseMax(mu);
    }

    std::vector<Vector> xi_scaled;
    xi_scaled.reserve(xi.size());
    for (const Vector& mu : xi)
        xi_scaled.push_back(normalize(mu, s.scale_lo, s.scale_hi));

    const auto nearest_index = [&](const Vector& target_scaled) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < static_cast<Index>(xi.size()); ++j) {
            const double dist = (xi_scaled[j] - target_scaled).norm();
            if (dist < best_d) {
                best_d = dist;
                best = j;
            }
        }
        return best;
    };

    // Initial coarse set: training points nearest to each domain corner and
    // to the center, then evenly spaced index padding up to n_coarse.
    std::vector<Index> center_idx;
    const auto add_center = [&](Index j) {
        for (Index k : center_idx)
            if (k == j) return;
        center_idx.push_back(j);
    };
    const Index n_corners = Index(1) << d;
    for (Index c = 0; c < n_corners && c < 64; ++c) {
        Vector corner(d);
        for (Index a = 0; a < d; ++a) corner[a] = (c >> a) & 1 ? 1.0 : 0.0;
        add_center(nearest_index(corner));
    }
    add_center(nearest_index(Vector::Constant(d, 0.5)));
    const Index n_xi = static_cast<Index>(xi.size());
    for (Index j = 0;
         static_cast<Index>(center_idx.size()) < n_coarse && j < n_coarse;
         ++j)
        add_center(j * (n_xi - 1) / std::max<Index>(n_coarse - 1, 1));
    for (Index j = 0;
         static_cast<Index>(center_idx.size()) < n_coarse && j < n_xi; ++j)
        add_center(j);

    std::vector<char> is_center(xi.size(), 0);
    std::vector<Vector> centers_scaled;
    std::vector<double> values;
    const auto grow = [&](Index j) {
        is_center[j] = 1;
        s.centers.push_back(xi[j]);
        centers_scaled.push_back(xi_scaled[j]);
        values.push_back(solve_sigma(xi[j]));
    };
    for (Index j : center_idx) grow(j);

    const auto refit = [&]() {
        Vector logs(values.size());
        for (size_t i = 0; i < values.size(); ++i)
            logs[static_cast<Index>(i)] = std::log(values[i]);
        s.weights = fit_weights(centers_scaled, logs);
        s.values = Vector::Map(values.data(), static_cast<Index>(values.size()));
    };
    const auto sweep = [&]() {
        Vector out(xi.size());
        for (Index j = 0; j < static_cast<Index>(xi.size()); ++j)
            out[j] = std::exp(eval_scaled(centers_scaled, s.weights,
                                          xi_scaled[j]));
        return out;
    };

    refit();
    Vector prev = sweep();

    while (static_cast<Index>(s.centers.size()) < max_centers) {
        // Enrichment criterion: local variation times distance to the
        // existing centers, evaluated over the training set.
        Index best = -1;
        double best_val = 0.0;
        for (Index j = 0; j < static_cast<Index>(xi.size()); ++j) {
            if (is_center[j]) continue;
            double dist = std::numeric_limits<double>::infinity();
            Index near = 0;
            for (size_t i = 0; i < centers_scaled.size(); ++i) {
                const double dd = (centers_scaled[i] - xi_scaled[j]).norm();
                if (dd < dist) {
                    dist = dd;
                    near = static_cast<Index>(i);
                }
            }
            const double crit = std::abs(prev[j] - values[near]) * dist;
            if (crit > best_val) {
                best_val = crit;
                best = j;
            }
        }
        if (best < 0) break;  // training set exhausted or response flat

        grow(best);
        refit();
        const Vector cur = sweep();
        double change = 0.0;
        for (Index j = 0; j < static_cast<Index>(xi.size()); ++j)
            change = std::max(change,
                              std::abs(cur[j] - prev[j]) / std::abs(prev[j]));
        s.change_history.push_back(change);
        prev = cur;
        if (change < tol_change) return s;
    }
    s.hit_max_centers = static_cast<Index>(s.centers.size()) >= max_centers;
    return s;
}

}  // namespace admor
