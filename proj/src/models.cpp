#include "helars/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "helars/error.hpp"

namespace helars {

namespace {

constexpr double kDegenerateMomentsTol = 1e-12;

Index observations(const Model& model, const Vector& xi) {
    return xi.size() - model.extra_stats();
}

void require_aux(const Vector& aux, Index n, std::string_view where) {
    if (aux.size() != n) {
        std::ostringstream msg;
        msg << where << ": aux has length " << aux.size() << ", expected " << n;
        fail(ErrorKind::InvalidArgument, msg.str());
    }
}

/// log erfc(z), accurate where erfc underflows.
double log_erfc(double z) {
    if (z < 25.0) return std::log(std::erfc(z));
    // erfc(z) = exp(-z^2) erfcx(z), asymptotic series for erfcx
    const double inv2 = 1.0 / (z * z);
    const double series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2;
    return -z * z - std::log(z * std::sqrt(std::numbers::pi)) + std::log(series);
}

}  // namespace

Matrix SeparableJacobian::dense() const {
    const Index n = diag.size();
    const Index r = tail.rows();
    Matrix out = Matrix::Zero(n + r, n + r);
    out.topLeftCorner(n, n).diagonal() = diag;
    out.topRightCorner(n, r) = upper;
    out.bottomLeftCorner(r, n) = lower;
    out.bottomRightCorner(r, r) = tail;
    return out;
}

bool Model::in_domain(const Vector& xi) const {
    const Index n = observations(*this, xi);
    if (n < 0 || !xi.allFinite()) return false;
    return xi(n) < 0.0;
}

void Model::require_domain(const Vector& xi) const {
    if (!in_domain(xi)) {
        std::ostringstream msg;
        msg << name() << ": natural parameter outside the model domain";
        const Index n = observations(*this, xi);
        if (n >= 0 && n < xi.size()) msg << " (xi^{n+1} = " << xi(n) << ", must be < 0)";
        fail(ErrorKind::DomainViolation, msg.str());
    }
}

Matrix Model::pfaffian_xi(const Vector& xi, const Vector& aux) const {
    const Matrix compact = pfaffian_compact(xi, aux);
    const Index n = observations(*this, xi);
    const Index r = extra_stats();
    Matrix out = Matrix::Zero(compact.rows(), n + r);
    for (Index a = 0; a < compact.rows(); ++a) {
        out(a, a) = compact(a, 0);
        for (Index b = 0; b < r; ++b) out(a, n + b) = compact(a, 1 + b);
    }
    return out;
}

Matrix Model::hess_psi_star(const Vector& xi, const Vector& aux) const {
    Matrix h = hess_compact(xi, aux).dense();
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) {
        fail(ErrorKind::NotPositiveDefinite,
             std::string(name()) + ": Fisher information is not positive definite");
    }
    return h;
}

Vector Model::init_theta(Index d) const {
    Vector theta = Vector::Zero(d + 1 + extra_stats());
    theta(d + 1) = -1.0;
    return theta;
}

// ---------------------------------------------------------------------------
// Truncated normal

Vector TruncatedNormalModel::sufficient_stat(const Vector& y) const {
    Vector out(y.size() + 1);
    out.head(y.size()) = y;
    out(y.size()) = y.squaredNorm();
    return out;
}

Matrix TruncatedNormalModel::pfaffian_compact(const Vector& xi, const Vector& aux) const {
    require_domain(xi);
    const Index n = xi.size() - 1;
    require_aux(aux, n, "truncnorm pfaffian");
    const double c = -0.5 / xi(n);
    Matrix out(n, 2);
    for (Index a = 0; a < n; ++a) {
        const double d1 = c * (std::exp(-aux(a)) + xi(a));
        out(a, 0) = d1;
        out(a, 1) = c * (1.0 + xi(a) * d1);
    }
    return out;
}

double TruncatedNormalModel::psi_star(const Vector& xi, const Vector& aux) const {
    require_domain(xi);
    require_aux(aux, xi.size() - 1, "truncnorm psi_star");
    return aux.sum();
}

Vector TruncatedNormalModel::grad_psi_star(const Vector& xi, const Vector& aux) const {
    const Matrix p = pfaffian_compact(xi, aux);
    const Index n = p.rows();
    Vector mu(n + 1);
    mu.head(n) = p.col(0);
    mu(n) = p.col(1).sum();
    return mu;
}

Vector TruncatedNormalModel::xi_from_mu(const Vector& mu, const Vector& aux) const {
    const Index n = mu.size() - 1;
    require_aux(aux, n, "truncnorm xi_from_mu");
    const double spread = mu(n) - mu.head(n).squaredNorm();
    if (!(spread > kDegenerateMomentsTol * std::abs(mu(n)))) {
        fail(ErrorKind::DegenerateMoments,
             "truncnorm xi_from_mu: second moment does not exceed squared means");
    }
    const Vector inv_a = (-aux.array()).exp();
    Vector xi(n + 1);
    xi(n) = -(n - mu.head(n).dot(inv_a)) / (2.0 * spread);
    xi.head(n) = -2.0 * xi(n) * mu.head(n) - inv_a;
    require_domain(xi);
    return xi;
}

Matrix TruncatedNormalModel::derivative_ratios(const Vector& xi, const Vector& aux) const {
    const Matrix p = pfaffian_compact(xi, aux);
    const Index n = p.rows();
    const double c = -0.5 / xi(n);
    Matrix ratios(n, 5);
    for (Index a = 0; a < n; ++a) {
        ratios(a, 0) = 1.0;
        ratios(a, 1) = p(a, 0);
        for (int m = 2; m <= 4; ++m) {
            ratios(a, m) = c * ((m - 1) * ratios(a, m - 2) + xi(a) * ratios(a, m - 1));
        }
    }
    return ratios;
}

SeparableJacobian TruncatedNormalModel::hess_compact(const Vector& xi, const Vector& aux) const {
    const Matrix dm = derivative_ratios(xi, aux);
    SeparableJacobian h;
    h.diag = dm.col(2).array() - dm.col(1).array().square();
    h.upper = (dm.col(3).array() - dm.col(2).array() * dm.col(1).array()).matrix();
    h.lower = h.upper.transpose();
    h.tail = Matrix::Constant(1, 1, (dm.col(4).array() - dm.col(2).array().square()).sum());
    return h;
}

SeparableJacobian TruncatedNormalModel::frozen_mu_jacobian(const Vector& xi,
                                                           const Vector& aux) const {
    const Matrix p = pfaffian_compact(xi, aux);
    const Index n = p.rows();
    const double s = xi(n);
    const double c = -0.5 / s;
    SeparableJacobian j;
    j.diag = Vector::Constant(n, c);
    j.upper.resize(n, 1);
    j.lower.resize(1, n);
    double tail = 0.0;
    for (Index a = 0; a < n; ++a) {
        const double mu_a = p(a, 0);
        j.upper(a, 0) = -mu_a / s;
        j.lower(0, a) = c * (mu_a + xi(a) * c);
        tail += -(c / s) * (1.0 + 2.0 * xi(a) * mu_a);
    }
    j.tail = Matrix::Constant(1, 1, tail);
    return j;
}

double truncnorm_log_normalizer(double xi1, double xi2) {
    if (!(xi2 < 0.0) || !std::isfinite(xi1)) {
        fail(ErrorKind::DomainViolation, "truncnorm normalizer requires xi2 < 0");
    }
    const double s = -xi2;
    const double z = -xi1 / (2.0 * std::sqrt(s));
    // A = exp(z^2) * (1/2) sqrt(pi/s) * erfc(z)
    return z * z + std::log(0.5 * std::sqrt(std::numbers::pi / s)) + log_erfc(z);
}

Vector TruncatedNormalModel::oracle_aux(const Vector& xi) const {
    require_domain(xi);
    const Index n = xi.size() - 1;
    Vector out(n);
    for (Index a = 0; a < n; ++a) out(a) = truncnorm_log_normalizer(xi(a), xi(n));
    return out;
}

Vector TruncatedNormalModel::init_aux(Index n) const {
    return Vector::Constant(n, std::log(std::sqrt(std::numbers::pi) / 2.0));
}

// ---------------------------------------------------------------------------
// Normal

Vector NormalModel::sufficient_stat(const Vector& y) const {
    Vector out(y.size() + 1);
    out.head(y.size()) = y;
    out(y.size()) = y.squaredNorm();
    return out;
}

Matrix NormalModel::pfaffian_compact(const Vector& xi, const Vector& aux) const {
    require_domain(xi);
    require_aux(aux, 0, "normal pfaffian");
    return Matrix(0, 2);
}

double NormalModel::psi_star(const Vector& xi, const Vector&) const {
    require_domain(xi);
    const Index n = xi.size() - 1;
    const double s = xi(n);
    const double half_n = 0.5 * static_cast<double>(n);
    return -xi.head(n).squaredNorm() / (4.0 * s) - half_n * std::log(-s) +
           half_n * std::log(std::numbers::pi);
}

Vector NormalModel::grad_psi_star(const Vector& xi, const Vector&) const {
    require_domain(xi);
    const Index n = xi.size() - 1;
    const double s = xi(n);
    Vector mu(n + 1);
    mu.head(n) = -xi.head(n) / (2.0 * s);
    mu(n) = xi.head(n).squaredNorm() / (4.0 * s * s) - static_cast<double>(n) / (2.0 * s);
    return mu;
}

Vector NormalModel::xi_from_mu(const Vector& mu, const Vector&) const {
    const Index n = mu.size() - 1;
    const double spread = mu(n) - mu.head(n).squaredNorm();
    if (!(spread > kDegenerateMomentsTol * std::abs(mu(n)))) {
        fail(ErrorKind::DegenerateMoments,
             "normal xi_from_mu: second moment does not exceed squared means");
    }
    Vector xi(n + 1);
    xi.head(n) = static_cast<double>(n) * mu.head(n) / spread;
    xi(n) = -static_cast<double>(n) / (2.0 * spread);
    return xi;
}

SeparableJacobian NormalModel::hess_compact(const Vector& xi, const Vector&) const {
    require_domain(xi);
    const Index n = xi.size() - 1;
    const double s = xi(n);
    SeparableJacobian h;
    h.diag = Vector::Constant(n, -0.5 / s);
    h.upper = xi.head(n) / (2.0 * s * s);
    h.lower = h.upper.transpose();
    h.tail = Matrix::Constant(1, 1,
                              -xi.head(n).squaredNorm() / (2.0 * s * s * s) +
                                  static_cast<double>(n) / (2.0 * s * s));
    return h;
}

SeparableJacobian NormalModel::frozen_mu_jacobian(const Vector& xi, const Vector& aux) const {
    return hess_compact(xi, aux);
}

Vector NormalModel::oracle_aux(const Vector& xi) const {
    require_domain(xi);
    return Vector(0);
}

Vector NormalModel::init_aux(Index) const { return Vector(0); }

std::unique_ptr<Model> make_model(std::string_view name) {
    if (name == "truncnorm") return std::make_unique<TruncatedNormalModel>();
    if (name == "normal") return std::make_unique<NormalModel>();
    fail(ErrorKind::InvalidArgument,
         "unknown model '" + std::string(name) + "' (expected truncnorm or normal)");
}

}  // namespace helars
