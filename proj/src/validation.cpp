#include "helars/validation.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helars/error.hpp"

namespace helars::validation {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

template <typename F>
OracleValue integrate_half_line(F&& f, const QuadratureSpec& spec, const char* what) {
    auto on_unit = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double one_minus = 1.0 - t;
        return f(t / one_minus) / (one_minus * one_minus);
    };
    double error = 0.0;
    const double value = Rule::integrate(on_unit, 0.0, 1.0, spec.max_subdivisions,
                                         spec.rel_tol, &error);
    if (!std::isfinite(value) || error > spec.abs_tol + spec.rel_tol * std::abs(value)) {
        std::ostringstream msg;
        msg << what << ": error estimate " << error << " above tolerance for value " << value;
        fail(ErrorKind::ToleranceNotMet, msg.str());
    }
    return {value, error};
}

void require_negative(double xi2) {
    if (!(xi2 < 0.0)) fail(ErrorKind::DomainViolation, "quadratic coefficient must be negative");
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        fail(ErrorKind::InvalidArgument, "quadrature tolerances must be positive");
    }
}

OracleValue quad_A(double xi1, double xi2, const QuadratureSpec& spec) {
    return quad_moment(0, xi1, xi2, spec);
}

OracleValue quad_moment(int k, double xi1, double xi2, const QuadratureSpec& spec) {
    spec.validate();
    require_negative(xi2);
    if (k < 0) fail(ErrorKind::InvalidArgument, "moment order must be non-negative");
    return integrate_half_line(
        [&](double y) { return std::pow(y, k) * std::exp(xi1 * y + xi2 * y * y); }, spec,
        "quad_moment");
}

Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
    Vector grad(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(x(i)));
        Vector plus = x;
        Vector minus = x;
        plus(i) += step;
        minus(i) -= step;
        grad(i) = (f(plus) - f(minus)) / (2.0 * step);
    }
    return grad;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h) {
    Matrix jac;
    for (Index j = 0; j < x.size(); ++j) {
        const double step = h * std::max(1.0, std::abs(x(j)));
        Vector plus = x;
        Vector minus = x;
        plus(j) += step;
        minus(j) -= step;
        const Vector column = (f(plus) - f(minus)) / (2.0 * step);
        if (j == 0) jac.resize(column.size(), x.size());
        jac.col(j) = column;
    }
    return jac;
}

OracleValue brute_divergence(const Vector& xi_p, const Vector& xi_q, const QuadratureSpec& spec) {
    spec.validate();
    if (xi_p.size() != xi_q.size() || xi_p.size() < 2) {
        fail(ErrorKind::InvalidArgument, "brute_divergence needs matching xi of length n + 1");
    }
    const Index n = xi_p.size() - 1;
    const double sp = xi_p(n);
    const double sq = xi_q(n);
    require_negative(sp);
    require_negative(sq);

    OracleValue total;
    for (Index a = 0; a < n; ++a) {
        const OracleValue ap = quad_A(xi_p(a), sp, spec);
        const OracleValue aq = quad_A(xi_q(a), sq, spec);
        const double log_ap = std::log(ap.value);
        const double log_aq = std::log(aq.value);
        auto integrand = [&](double y) {
            const double log_p = xi_p(a) * y + sp * y * y - log_ap;
            const double log_q = xi_q(a) * y + sq * y * y - log_aq;
            return std::exp(log_p) * (log_p - log_q);
        };
        const OracleValue term = integrate_half_line(integrand, spec, "brute_divergence");
        total.value += term.value;
        // First-order propagation of the normalizer errors through the logs.
        total.error += term.error + ap.error / ap.value + aq.error / aq.value;
    }
    return total;
}

}  // namespace helars::validation
