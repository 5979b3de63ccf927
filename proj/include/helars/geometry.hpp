#pragma once

#include <vector>

#include "helars/models.hpp"
#include "helars/transport.hpp"
#include "helars/types.hpp"

namespace helars {

/// Links the (d + r + 1)-dimensional GLM submanifold to the ambient family:
/// xi = X_B theta with X_B = [X~, 0; 0, I_r] and X~ = [1 | X].
/// X_B is never materialized in the algorithm paths.
class DesignBlock {
public:
    /// Prepends the intercept column to `covariates` (n x d). Throws
    /// InvalidArgument unless [1 | X] has full column rank.
    DesignBlock(const Matrix& covariates, Index extra_stats);

    Index n() const { return x_tilde_.rows(); }
    Index d() const { return x_tilde_.cols() - 1; }
    Index r() const { return r_; }
    Index dim() const { return x_tilde_.cols() + r_; }

    const Matrix& x_tilde() const { return x_tilde_; }

    Vector xi(const Vector& theta) const;              // X_B theta
    Vector pull_back(const Vector& mu) const;          // X_B^T mu
    Matrix pull_back(const SeparableJacobian& g) const;  // X_B^T G X_B
    Matrix pull_back_pfaffian(const Matrix& compact) const;  // (dL/dxi) X_B
    Matrix dense() const;

    bool is_extra(Index j) const { return j >= d() + 1; }

private:
    Matrix x_tilde_;
    Index r_;
};

/// Active covariate indices I, a subset of {1..d}. Index 0 and the extra
/// statistics are never members.
class IndexSet {
public:
    static IndexSet all(Index d);

    Index d() const { return static_cast<Index>(active_.size()) - 1; }
    bool contains(Index j) const;
    void erase(Index j);
    Index size() const;
    std::vector<Index> indices() const;

private:
    std::vector<bool> active_;  // slot 0 unused
};

struct NewtonOptions {
    double tol = 1e-24;  // on the squared residual norm
    int max_iter = 200;
};

struct FullPoint {
    Vector theta;
    Vector eta;
    int iterations = 0;
};

Vector theta_to_xi(const DesignBlock& design, const Vector& theta);

Vector theta_to_eta(const Model& model, const DesignBlock& design, const Vector& theta,
                    const Vector& aux);

/// G(theta) = X_B^T G*(X_B theta) X_B.
Matrix fisher_theta(const Model& model, const DesignBlock& design, const Vector& theta,
                    const Vector& aux);

/// dL/dtheta = (dL/dxi) X_B.
Matrix aux_gradient_theta(const Model& model, const DesignBlock& design, const Vector& theta,
                          const Vector& aux);

/// Recovers (theta, eta) from mixed coordinates. The unknown theta^J are
/// found by Newton iteration on eta_J(theta) = rho_J with L held at `aux`;
/// the eta entries outside J follow from the converged theta. Steps that
/// would push an extra-statistic coordinate to >= 0 are shortened by
/// newton_halve_step.
FullPoint mixed_to_full(const Model& model, const DesignBlock& design, const MixedPoint& rho,
                        const Vector& aux, const Vector& theta_guess,
                        const NewtonOptions& opts = {});

/// As mixed_to_full, but L follows theta through the closed form. Used only
/// for differential runs against the holonomic path.
FullPoint mixed_to_full_closed_form(const Model& model, const DesignBlock& design,
                                    const MixedPoint& rho, const Vector& theta_guess,
                                    const NewtonOptions& opts = {});

/// (1/2)^alpha with alpha = ceil(-log(-theta/delta) / log 2), bumped by one
/// when the shortened step would land exactly on zero.
double newton_halve_step(double theta_entry, double delta_entry);

/// d theta* / d rho for mixed coordinates with the given mask.
Matrix dtheta_drho(const Model& model, const DesignBlock& design, const Vector& theta,
                   const Vector& aux, const Mask& eta_mask);

MixedPoint to_mixed(const Vector& theta, const Vector& eta, const Mask& eta_mask);

/// Mask of the m-projection onto M(i, alpha, I): eta entries on the
/// intercept, the extra statistics and I \ {i}; theta entries on i and on
/// every covariate outside I.
Mask projection_mask(const DesignBlock& design, Index i, const IndexSet& active);

/// Holonomic m-projection of `point` onto M(i, alpha, I).
ModelPoint m_project(const Model& model, const DesignBlock& design, const ModelPoint& point,
                     Index i, double alpha, const IndexSet& active,
                     const TransportOptions& transport = {}, const NewtonOptions& newton = {});

/// D^{[I]}(p, q) = phi_I(eta_I(p)) + psi_I(theta_I(q)) - eta_I(p) . theta_I(q).
/// Both points must have zero coefficients on covariates outside I.
double divergence(const Model& model, const DesignBlock& design, const ModelPoint& p,
                  const ModelPoint& q, const IndexSet& active);

/// Throws MaskViolation if a covariate outside I has |theta^j| > 1e-10.
void require_in_submanifold(const DesignBlock& design, const Vector& theta,
                            const IndexSet& active);

}  // namespace helars
