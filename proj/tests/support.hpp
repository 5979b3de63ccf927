#pragma once

#include <random>

#include "helars/geometry.hpp"
#include "helars/models.hpp"
#include "helars/types.hpp"

namespace helars::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// xi with per-observation entries in [lo, hi] and the shared entry in [s_lo, s_hi].
inline Vector random_xi(std::mt19937_64& rng, Index n, double lo = -2.0, double hi = 2.0,
                        double s_lo = -3.0, double s_hi = -0.3) {
    Vector xi(n + 1);
    for (Index a = 0; a < n; ++a) xi(a) = uniform(rng, lo, hi);
    xi(n) = uniform(rng, s_lo, s_hi);
    return xi;
}

inline Matrix random_covariates(std::mt19937_64& rng, Index n, Index d) {
    Matrix x(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) x(i, j) = uniform(rng, -1.0, 1.0);
    }
    return x;
}

/// theta with modest covariate effects and a safely negative quadratic term.
inline Vector random_theta(std::mt19937_64& rng, Index d) {
    Vector theta(d + 2);
    theta(0) = uniform(rng, -0.5, 1.0);
    for (Index j = 1; j <= d; ++j) theta(j) = uniform(rng, -0.6, 0.6);
    theta(d + 1) = uniform(rng, -1.5, -0.5);
    return theta;
}

inline ModelPoint exact_point(const Model& model, const DesignBlock& design, const Vector& theta) {
    return {theta, model.oracle_aux(design.xi(theta))};
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double max_rel(const Matrix& got, const Matrix& want) {
    double worst = 0.0;
    for (Index i = 0; i < got.rows(); ++i) {
        for (Index j = 0; j < got.cols(); ++j) {
            const double err = std::abs(got(i, j) - want(i, j)) / std::max(1.0, std::abs(want(i, j)));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace helars::testing
