#pragma once

#include "helars/geometry.hpp"
#include "helars/models.hpp"
#include "helars/transport.hpp"

namespace helars {

struct MleOptions {
    double grad_tol = 1e-12;     // on the squared gradient norm
    int max_iter = 1000;
    int max_halvings = 20;
    double fallback_step = 0.1;  // length of a normalized gradient step
    TransportOptions transport;
};

struct MleResult {
    Vector theta;
    Vector aux;
    double loglike = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;

    ModelPoint point() const { return {theta, aux}; }
};

/// l(theta) = Y^T X_B theta - psi(theta).
double loglike(const Model& model, const DesignBlock& design, const Vector& suff_stat,
               const Vector& theta, const Vector& aux);

/// X_B^T (Y - mu).
Vector loglike_gradient(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                        const Vector& theta, const Vector& aux);

/// Damped Newton-Raphson from (0, ..., 0, -1) with the anchored L. Every
/// accepted step carries L along by holonomic transport.
MleResult mle_full(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                   const MleOptions& opts = {});

/// Intercept-only fit: covariate coefficients stay at zero.
MleResult mle_null(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                   const MleOptions& opts = {});

}  // namespace helars
