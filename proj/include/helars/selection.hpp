#pragma once

#include <vector>

#include "helars/estimation.hpp"
#include "helars/geometry.hpp"

namespace helars {

struct SelectionConfig {
    double bisection_tol = 1e-3;  // relative tolerance on |D - t*|
    int bisection_max = 40;
    TransportOptions transport;
    NewtonOptions newton;
    MleOptions mle;

    void validate() const;
};

struct PathStep {
    Index k = 0;
    Vector theta;
    Vector aux;
    double divergence_ratio = 0.0;
};

struct SelectionPath {
    std::vector<PathStep> steps;      // k = 0..d
    std::vector<Index> removal_order;  // least important first
};

/// Bisection for alpha in [0, theta^i] with D^{[I]}(current, proj(i, alpha)) = t_star.
/// `divergence_at_zero` is D^{[I]} for the projection to alpha = 0 and must
/// not be below t_star.
double find_component_alpha(const Model& model, const DesignBlock& design,
                            const ModelPoint& current, double t_star, Index i,
                            const IndexSet& active, double divergence_at_zero,
                            const SelectionConfig& config);

/// Runs the selection loop from precomputed full and intercept-only fits.
SelectionPath run_helars(const Model& model, const DesignBlock& design, const MleResult& full,
                         const MleResult& null, const SelectionConfig& config = {});

/// Fits both models, then runs the selection loop.
SelectionPath run_helars(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                         const SelectionConfig& config = {});

/// Covariates in the order their coefficients vanish along the path.
std::vector<Index> covariate_order(const SelectionPath& path);

}  // namespace helars
