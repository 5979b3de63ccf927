#include "helars/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "helars/error.hpp"

namespace helars {

namespace {

constexpr double kMaskTol = 1e-10;
constexpr double kStagnationTol = 1e-14;
constexpr double kSingularRcond = 1e-13;

std::vector<Index> select(const Mask& mask, bool value) {
    std::vector<Index> out;
    for (std::size_t j = 0; j < mask.size(); ++j) {
        if (mask[j] == value) out.push_back(static_cast<Index>(j));
    }
    return out;
}

Vector gather(const Vector& v, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = v(idx[k]);
    return out;
}

Matrix gather(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            out(static_cast<Index>(a), static_cast<Index>(b)) = m(rows[a], cols[b]);
        }
    }
    return out;
}

void check_mixed(const DesignBlock& design, const MixedPoint& rho, const Vector& guess) {
    if (rho.values.size() != design.dim() ||
        static_cast<Index>(rho.eta_mask.size()) != design.dim() || guess.size() != design.dim()) {
        fail(ErrorKind::InvalidArgument, "mixed point does not match the design dimension");
    }
}

// Shortens a Newton step on theta^J so every extra-statistic coordinate
// stays strictly negative.
double domain_scale(const DesignBlock& design, const Vector& theta,
                    const std::vector<Index>& unknown, const Vector& delta) {
    double scale = 1.0;
    for (std::size_t k = 0; k < unknown.size(); ++k) {
        const Index j = unknown[k];
        if (!design.is_extra(j)) continue;
        const double step = delta(static_cast<Index>(k));
        if (theta(j) + step >= 0.0) scale = std::min(scale, newton_halve_step(theta(j), step));
    }
    return scale;
}

template <typename Residual>
FullPoint newton_on_theta(const DesignBlock& design, const MixedPoint& rho,
                          const Vector& theta_guess, const NewtonOptions& opts,
                          Residual&& evaluate) {
    check_mixed(design, rho, theta_guess);
    const std::vector<Index> unknown = select(rho.eta_mask, true);
    Vector theta = rho.values;
    for (Index j : unknown) theta(j) = theta_guess(j);
    const Vector target = gather(rho.values, unknown);

    for (int iter = 0;; ++iter) {
        Matrix jac;
        const Vector eta = evaluate(theta, unknown.empty() ? nullptr : &jac);
        if (unknown.empty()) return {theta, eta, 0};
        const Vector residual = target - gather(eta, unknown);
        if (!residual.allFinite()) {
            fail(ErrorKind::NoConvergence, "mixed coordinate recovery produced non-finite values");
        }
        if (residual.squaredNorm() <= opts.tol) return {theta, eta, iter};
        if (iter >= opts.max_iter) {
            std::ostringstream msg;
            msg << "mixed coordinate recovery did not converge in " << opts.max_iter
                << " iterations (|F|^2 = " << residual.squaredNorm() << ")";
            fail(ErrorKind::NoConvergence, msg.str());
        }
        const Matrix block = gather(jac, unknown, unknown);
        const Vector delta = block.partialPivLu().solve(residual);
        if (!delta.allFinite()) {
            fail(ErrorKind::NoConvergence, "singular Jacobian in mixed coordinate recovery");
        }
        const double scale = domain_scale(design, theta, unknown, delta);
        for (std::size_t k = 0; k < unknown.size(); ++k) {
            theta(unknown[k]) += scale * delta(static_cast<Index>(k));
        }
        // Residual at the rounding floor: the step no longer moves theta.
        const double size = gather(theta, unknown).lpNorm<Eigen::Infinity>();
        if (scale == 1.0 && delta.lpNorm<Eigen::Infinity>() <= kStagnationTol * (1.0 + size)) {
            return {theta, evaluate(theta, nullptr), iter + 1};
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// DesignBlock

DesignBlock::DesignBlock(const Matrix& covariates, Index extra_stats) : r_(extra_stats) {
    if (extra_stats < 0) fail(ErrorKind::InvalidArgument, "extra statistic count must be >= 0");
    x_tilde_.resize(covariates.rows(), covariates.cols() + 1);
    x_tilde_.col(0).setOnes();
    x_tilde_.rightCols(covariates.cols()) = covariates;
    Eigen::ColPivHouseholderQR<Matrix> qr(x_tilde_);
    if (qr.rank() < x_tilde_.cols()) {
        fail(ErrorKind::InvalidArgument, "design [1 | X] does not have full column rank");
    }
}

Vector DesignBlock::xi(const Vector& theta) const {
    if (theta.size() != dim()) fail(ErrorKind::InvalidArgument, "theta has the wrong length");
    Vector out(n() + r_);
    out.head(n()).noalias() = x_tilde_ * theta.head(d() + 1);
    out.tail(r_) = theta.tail(r_);
    return out;
}

Vector DesignBlock::pull_back(const Vector& mu) const {
    if (mu.size() != n() + r_) fail(ErrorKind::InvalidArgument, "mu has the wrong length");
    Vector out(dim());
    out.head(d() + 1).noalias() = x_tilde_.transpose() * mu.head(n());
    out.tail(r_) = mu.tail(r_);
    return out;
}

Matrix DesignBlock::pull_back(const SeparableJacobian& g) const {
    const Index p = d() + 1;
    Matrix out(dim(), dim());
    out.topLeftCorner(p, p).noalias() =
        x_tilde_.transpose() * g.diag.asDiagonal() * x_tilde_;
    out.topRightCorner(p, r_).noalias() = x_tilde_.transpose() * g.upper;
    out.bottomLeftCorner(r_, p).noalias() = g.lower * x_tilde_;
    out.bottomRightCorner(r_, r_) = g.tail;
    return out;
}

Matrix DesignBlock::pull_back_pfaffian(const Matrix& compact) const {
    Matrix out(compact.rows(), dim());
    if (compact.rows() == 0) return out;
    out.leftCols(d() + 1).noalias() = compact.col(0).asDiagonal() * x_tilde_;
    out.rightCols(r_) = compact.rightCols(r_);
    return out;
}

Matrix DesignBlock::dense() const {
    Matrix out = Matrix::Zero(n() + r_, dim());
    out.topLeftCorner(n(), d() + 1) = x_tilde_;
    out.bottomRightCorner(r_, r_).setIdentity();
    return out;
}

// ---------------------------------------------------------------------------
// IndexSet

IndexSet IndexSet::all(Index d) {
    IndexSet set;
    set.active_.assign(static_cast<std::size_t>(d + 1), true);
    set.active_[0] = false;
    return set;
}

bool IndexSet::contains(Index j) const {
    return j >= 1 && j <= d() && active_[static_cast<std::size_t>(j)];
}

void IndexSet::erase(Index j) {
    if (j < 1 || j > d()) fail(ErrorKind::InvalidArgument, "covariate index out of range");
    active_[static_cast<std::size_t>(j)] = false;
}

Index IndexSet::size() const {
    return static_cast<Index>(std::count(active_.begin(), active_.end(), true));
}

std::vector<Index> IndexSet::indices() const {
    std::vector<Index> out;
    for (Index j = 1; j <= d(); ++j) {
        if (contains(j)) out.push_back(j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coordinates

Vector theta_to_xi(const DesignBlock& design, const Vector& theta) { return design.xi(theta); }

Vector theta_to_eta(const Model& model, const DesignBlock& design, const Vector& theta,
                    const Vector& aux) {
    return design.pull_back(model.mu_from_xi(design.xi(theta), aux));
}

Matrix fisher_theta(const Model& model, const DesignBlock& design, const Vector& theta,
                    const Vector& aux) {
    const Matrix g = design.pull_back(model.hess_compact(design.xi(theta), aux));
    return 0.5 * (g + g.transpose());
}

Matrix aux_gradient_theta(const Model& model, const DesignBlock& design, const Vector& theta,
                          const Vector& aux) {
    return design.pull_back_pfaffian(model.pfaffian_compact(design.xi(theta), aux));
}

FullPoint mixed_to_full(const Model& model, const DesignBlock& design, const MixedPoint& rho,
                        const Vector& aux, const Vector& theta_guess,
                        const NewtonOptions& opts) {
    return newton_on_theta(design, rho, theta_guess, opts, [&](const Vector& theta, Matrix* jac) {
        const Vector xi = design.xi(theta);
        if (jac) *jac = design.pull_back(model.frozen_mu_jacobian(xi, aux));
        return design.pull_back(model.mu_from_xi(xi, aux));
    });
}

FullPoint mixed_to_full_closed_form(const Model& model, const DesignBlock& design,
                                    const MixedPoint& rho, const Vector& theta_guess,
                                    const NewtonOptions& opts) {
    return newton_on_theta(design, rho, theta_guess, opts, [&](const Vector& theta, Matrix* jac) {
        const Vector xi = design.xi(theta);
        const Vector aux = model.oracle_aux(xi);
        if (jac) *jac = design.pull_back(model.hess_compact(xi, aux));
        return design.pull_back(model.mu_from_xi(xi, aux));
    });
}

double newton_halve_step(double theta_entry, double delta_entry) {
    if (!(theta_entry < 0.0)) {
        fail(ErrorKind::InvalidArgument, "newton_halve_step needs a negative coordinate");
    }
    if (theta_entry + delta_entry < 0.0) return 1.0;
    int alpha = static_cast<int>(std::ceil(-std::log(-theta_entry / delta_entry) / std::log(2.0)));
    alpha = std::max(alpha, 0);
    while (theta_entry + std::ldexp(delta_entry, -alpha) >= 0.0) ++alpha;
    return std::ldexp(1.0, -alpha);
}

Matrix dtheta_drho(const Model& model, const DesignBlock& design, const Vector& theta,
                   const Vector& aux, const Mask& eta_mask) {
    const Index m = design.dim();
    if (static_cast<Index>(eta_mask.size()) != m) {
        fail(ErrorKind::InvalidArgument, "dtheta_drho: mask length mismatch");
    }
    const std::vector<Index> eta_idx = select(eta_mask, true);
    const std::vector<Index> theta_idx = select(eta_mask, false);
    Matrix out = Matrix::Zero(m, m);
    for (Index j : theta_idx) out(j, j) = 1.0;
    if (eta_idx.empty()) return out;

    const Matrix g = fisher_theta(model, design, theta, aux);
    const Matrix g_jj = gather(g, eta_idx, eta_idx);
    Eigen::LLT<Matrix> llt(g_jj);
    if (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond) {
        fail(ErrorKind::SingularBlock, "d eta_J / d theta^J is numerically singular");
    }
    const Matrix inv = llt.solve(Matrix::Identity(g_jj.rows(), g_jj.cols()));
    const Matrix cross = -(inv * gather(g, eta_idx, theta_idx));
    for (std::size_t a = 0; a < eta_idx.size(); ++a) {
        for (std::size_t b = 0; b < eta_idx.size(); ++b) {
            out(eta_idx[a], eta_idx[b]) = inv(static_cast<Index>(a), static_cast<Index>(b));
        }
        for (std::size_t b = 0; b < theta_idx.size(); ++b) {
            out(eta_idx[a], theta_idx[b]) = cross(static_cast<Index>(a), static_cast<Index>(b));
        }
    }
    return out;
}

MixedPoint to_mixed(const Vector& theta, const Vector& eta, const Mask& eta_mask) {
    MixedPoint rho{theta, eta_mask};
    for (std::size_t j = 0; j < eta_mask.size(); ++j) {
        if (eta_mask[j]) rho.values(static_cast<Index>(j)) = eta(static_cast<Index>(j));
    }
    return rho;
}

Mask projection_mask(const DesignBlock& design, Index i, const IndexSet& active) {
    Mask mask(static_cast<std::size_t>(design.dim()), true);
    for (Index j = 1; j <= design.d(); ++j) {
        mask[static_cast<std::size_t>(j)] = active.contains(j) && j != i;
    }
    return mask;
}

void require_in_submanifold(const DesignBlock& design, const Vector& theta,
                            const IndexSet& active) {
    for (Index j = 1; j <= design.d(); ++j) {
        if (!active.contains(j) && std::abs(theta(j)) > kMaskTol) {
            std::ostringstream msg;
            msg << "covariate " << j << " is outside the active set but theta^" << j << " = "
                << theta(j);
            fail(ErrorKind::MaskViolation, msg.str());
        }
    }
}

ModelPoint m_project(const Model& model, const DesignBlock& design, const ModelPoint& point,
                     Index i, double alpha, const IndexSet& active,
                     const TransportOptions& transport, const NewtonOptions& newton) {
    if (!active.contains(i)) {
        fail(ErrorKind::InvalidArgument, "m_project: covariate is not in the active set");
    }
    require_in_submanifold(design, point.theta, active);
    const Mask mask = projection_mask(design, i, active);
    const Vector eta = theta_to_eta(model, design, point.theta, point.aux);
    const MixedPoint rho_old = to_mixed(point.theta, eta, mask);
    MixedPoint rho_new = rho_old;
    rho_new.values(i) = alpha;

    ModelPoint out;
    out.aux = transport_mixed(model, design, rho_old, point.aux, rho_new, point.theta, transport,
                              newton);
    out.theta = transport.closed_form
                    ? mixed_to_full_closed_form(model, design, rho_new, point.theta, newton).theta
                    : mixed_to_full(model, design, rho_new, out.aux, point.theta, newton).theta;
    return out;
}

double divergence(const Model& model, const DesignBlock& design, const ModelPoint& p,
                  const ModelPoint& q, const IndexSet& active) {
    require_in_submanifold(design, p.theta, active);
    require_in_submanifold(design, q.theta, active);
    const double psi_p = model.psi_star(design.xi(p.theta), p.aux);
    const double psi_q = model.psi_star(design.xi(q.theta), q.aux);
    const Vector eta_p = theta_to_eta(model, design, p.theta, p.aux);
    double cross = 0.0;
    for (Index j = 0; j < design.dim(); ++j) {
        const bool live = j == 0 || design.is_extra(j) || active.contains(j);
        if (live) cross += eta_p(j) * (q.theta(j) - p.theta(j));
    }
    return psi_q - psi_p - cross;
}

}  // namespace helars
