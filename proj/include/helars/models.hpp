#pragma once

#include <memory>
#include <string_view>

#include "helars/types.hpp"

namespace helars {

/// Derivative of the expectation map mu(xi) for a family whose observations
/// are independent given xi and share only the trailing r natural
/// parameters. Derivatives between distinct per-observation coordinates
/// vanish, so only four blocks are stored.
struct SeparableJacobian {
    Vector diag;   // d mu_a / d xi^a                 (n)
    Matrix upper;  // d mu_a / d xi^{n+b}             (n x r)
    Matrix lower;  // d mu_{n+b} / d xi^a             (r x n)
    Matrix tail;   // d mu_{n+b} / d xi^{n+c}         (r x r)

    Matrix dense() const;
};

/// Exponential family over the ambient natural parameter xi of length n + r:
///   p(y | xi) = exp(sum_a y_a xi^a + sum_b u_b(y) xi^{n+b} - psi*(xi)).
/// The potential is only ever evaluated through (xi, L), where L is the
/// vector of log-normalizers the holonomic transport keeps track of.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string_view name() const = 0;

    /// Number r of sufficient statistics shared by all observations.
    virtual Index extra_stats() const = 0;

    /// Length of the auxiliary vector L for n observations.
    virtual Index aux_size(Index n) const = 0;

    /// Both implemented families require the shared quadratic coefficient
    /// xi^{n+1} to be negative.
    bool in_domain(const Vector& xi) const;
    void require_domain(const Vector& xi) const;

    /// (y_1, ..., y_n, u_1(y), ..., u_r(y)).
    virtual Vector sufficient_stat(const Vector& y) const = 0;

    /// Nonzero part of dL/dxi: row a holds dL_a/dxi^a in column 0 and
    /// dL_a/dxi^{n+b} in column b.
    virtual Matrix pfaffian_compact(const Vector& xi, const Vector& aux) const = 0;

    /// Dense dL/dxi of shape (aux_size x (n + r)).
    Matrix pfaffian_xi(const Vector& xi, const Vector& aux) const;

    virtual double psi_star(const Vector& xi, const Vector& aux) const = 0;

    virtual Vector grad_psi_star(const Vector& xi, const Vector& aux) const = 0;

    Vector mu_from_xi(const Vector& xi, const Vector& aux) const { return grad_psi_star(xi, aux); }

    virtual Vector xi_from_mu(const Vector& mu, const Vector& aux) const = 0;

    /// Fisher information d^2 psi* / dxi dxi^T in separable form.
    virtual SeparableJacobian hess_compact(const Vector& xi, const Vector& aux) const = 0;

    /// Dense Fisher information; throws NotPositiveDefinite when the
    /// Cholesky factorization fails.
    Matrix hess_psi_star(const Vector& xi, const Vector& aux) const;

    /// Jacobian of grad_psi_star(xi, aux) in xi with aux held fixed. This is
    /// the exact derivative of the residual solved by mixed-coordinate
    /// recovery, where L is pinned to its value at the target point.
    virtual SeparableJacobian frozen_mu_jacobian(const Vector& xi, const Vector& aux) const = 0;

    /// Closed-form L, for tests and differential runs only. Algorithm code
    /// paths never call this unless closed-form mode is requested.
    virtual Vector oracle_aux(const Vector& xi) const = 0;

    /// theta = (0, ..., 0, -1) for d covariates.
    Vector init_theta(Index d) const;

    /// Exactly known L at xi = (0, ..., 0, -1).
    virtual Vector init_aux(Index n) const = 0;
};

/// Normal law restricted to (0, inf) with a shared variance. L_a is the log
/// of A(xi^a, xi^{n+1}) = int_0^inf exp(xi^a y + xi^{n+1} y^2) dy.
class TruncatedNormalModel final : public Model {
public:
    std::string_view name() const override { return "truncnorm"; }
    Index extra_stats() const override { return 1; }
    Index aux_size(Index n) const override { return n; }
    Vector sufficient_stat(const Vector& y) const override;
    Matrix pfaffian_compact(const Vector& xi, const Vector& aux) const override;
    double psi_star(const Vector& xi, const Vector& aux) const override;
    Vector grad_psi_star(const Vector& xi, const Vector& aux) const override;
    Vector xi_from_mu(const Vector& mu, const Vector& aux) const override;
    SeparableJacobian hess_compact(const Vector& xi, const Vector& aux) const override;
    SeparableJacobian frozen_mu_jacobian(const Vector& xi, const Vector& aux) const override;
    Vector oracle_aux(const Vector& xi) const override;
    Vector init_aux(Index n) const override;

    /// Ratios D_m = (d^m A_a / d(xi^a)^m) / A_a for m = 0..4, one row per
    /// observation, from D_1 = dL_a/dxi^a and the three-term recursion.
    Matrix derivative_ratios(const Vector& xi, const Vector& aux) const;
};

/// Ordinary normal linear model; closed-form potential and no aux vector.
class NormalModel final : public Model {
public:
    std::string_view name() const override { return "normal"; }
    Index extra_stats() const override { return 1; }
    Index aux_size(Index) const override { return 0; }
    Vector sufficient_stat(const Vector& y) const override;
    Matrix pfaffian_compact(const Vector& xi, const Vector& aux) const override;
    double psi_star(const Vector& xi, const Vector& aux) const override;
    Vector grad_psi_star(const Vector& xi, const Vector& aux) const override;
    Vector xi_from_mu(const Vector& mu, const Vector& aux) const override;
    SeparableJacobian hess_compact(const Vector& xi, const Vector& aux) const override;
    SeparableJacobian frozen_mu_jacobian(const Vector& xi, const Vector& aux) const override;
    Vector oracle_aux(const Vector& xi) const override;
    Vector init_aux(Index n) const override;
};

/// "truncnorm" or "normal"; throws InvalidArgument otherwise.
std::unique_ptr<Model> make_model(std::string_view name);

/// log A(xi1, xi2) in closed form through erfc; xi2 < 0.
double truncnorm_log_normalizer(double xi1, double xi2);

}  // namespace helars
