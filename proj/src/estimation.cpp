#include "helars/estimation.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "helars/error.hpp"

namespace helars {

namespace {

// Relative slack on the log-likelihood comparison; transported L is only
// accurate to the integrator tolerance.
constexpr double kLoglikeSlack = 1e-10;

bool leaves_domain(const DesignBlock& design, const Vector& theta, const Vector& delta) {
    for (Index j = design.d() + 1; j < design.dim(); ++j) {
        if (theta(j) + delta(j) >= 0.0) return true;
    }
    return false;
}

MleResult damped_newton(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                        const std::vector<Index>& free, const MleOptions& opts) {
    if (suff_stat.size() != design.n() + design.r()) {
        fail(ErrorKind::InvalidArgument, "sufficient statistic does not match the design");
    }
    const Index k = static_cast<Index>(free.size());
    Vector theta = model.init_theta(design.d());
    Vector aux = opts.transport.closed_form ? model.oracle_aux(design.xi(theta))
                                            : model.init_aux(design.n());
    double ll = loglike(model, design, suff_stat, theta, aux);

    for (int iter = 0;; ++iter) {
        const Vector grad_full = loglike_gradient(model, design, suff_stat, theta, aux);
        Vector grad(k);
        for (Index a = 0; a < k; ++a) grad(a) = grad_full(free[a]);
        if (grad.squaredNorm() <= opts.grad_tol) {
            return {theta, aux, ll, grad.norm(), iter};
        }
        if (iter >= opts.max_iter) {
            std::ostringstream msg;
            msg << "maximum likelihood did not converge in " << opts.max_iter
                << " iterations (|grad|^2 = " << grad.squaredNorm() << ")";
            fail(ErrorKind::NoConvergence, msg.str());
        }

        const Matrix g_full = fisher_theta(model, design, theta, aux);
        Matrix g(k, k);
        for (Index a = 0; a < k; ++a) {
            for (Index b = 0; b < k; ++b) g(a, b) = g_full(free[a], free[b]);
        }
        Vector direction;
        Eigen::LLT<Matrix> llt(g);
        if (llt.info() == Eigen::Success) direction = llt.solve(grad);
        if (direction.size() != k || !direction.allFinite() || grad.dot(direction) <= 0.0) {
            direction = opts.fallback_step * grad / grad.norm();
        }

        Vector delta = Vector::Zero(theta.size());
        for (Index a = 0; a < k; ++a) delta(free[a]) = direction(a);
        if (leaves_domain(design, theta, delta)) {
            // A Newton step out of the domain is a poor quadratic model;
            // shortening it tends to run toward the boundary, so fall back
            // to a short ascent step instead.
            const Vector fallback = opts.fallback_step * grad / grad.norm();
            for (Index a = 0; a < k; ++a) delta(free[a]) = fallback(a);
        }
        double step = 1.0;
        for (Index j = design.d() + 1; j < design.dim(); ++j) {
            if (theta(j) + delta(j) >= 0.0) step = std::min(step, newton_halve_step(theta(j), delta(j)));
        }

        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            const Vector candidate = theta + step * delta;
            Vector candidate_aux;
            try {
                candidate_aux = transport_theta(model, design, theta, aux, candidate, opts.transport);
            } catch (const Error& e) {
                // Long trial steps can cross regions where transport is unstable.
                if (e.kind() != ErrorKind::NonFiniteDerivative &&
                    e.kind() != ErrorKind::StepLimitExceeded) {
                    throw;
                }
                continue;
            }
            const double candidate_ll = loglike(model, design, suff_stat, candidate, candidate_aux);
            if (candidate_ll >= ll - kLoglikeSlack * std::max(1.0, std::abs(ll))) {
                theta = candidate;
                aux = std::move(candidate_aux);
                ll = candidate_ll;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            fail(ErrorKind::NoConvergence,
                 "damped Newton step could not increase the log-likelihood");
        }
    }
}

}  // namespace

double loglike(const Model& model, const DesignBlock& design, const Vector& suff_stat,
               const Vector& theta, const Vector& aux) {
    const Vector xi = design.xi(theta);
    return suff_stat.dot(xi) - model.psi_star(xi, aux);
}

Vector loglike_gradient(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                        const Vector& theta, const Vector& aux) {
    const Vector mu = model.mu_from_xi(design.xi(theta), aux);
    return design.pull_back(suff_stat - mu);
}

MleResult mle_full(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                   const MleOptions& opts) {
    std::vector<Index> free;
    for (Index j = 0; j < design.dim(); ++j) free.push_back(j);
    return damped_newton(model, design, suff_stat, free, opts);
}

MleResult mle_null(const Model& model, const DesignBlock& design, const Vector& suff_stat,
                   const MleOptions& opts) {
    std::vector<Index> free{0};
    for (Index j = design.d() + 1; j < design.dim(); ++j) free.push_back(j);
    return damped_newton(model, design, suff_stat, free, opts);
}

}  // namespace helars
