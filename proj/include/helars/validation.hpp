#pragma once

#include <functional>

#include "helars/types.hpp"

// Independent oracles for the tests and for differential runs. Nothing here
// calls into the models, geometry or selection code it is used to check.
namespace helars::validation {

struct QuadratureSpec {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    unsigned max_subdivisions = 20;  // bisection depth of the adaptive rule

    void validate() const;
};

/// A value together with the integrator's own error estimate.
struct OracleValue {
    double value = 0.0;
    double error = 0.0;
};

/// int_0^inf exp(xi1 y + xi2 y^2) dy by adaptive Gauss-Kronrod after the
/// substitution y = t / (1 - t). Throws ToleranceNotMet when the error
/// estimate exceeds the requested tolerance.
OracleValue quad_A(double xi1, double xi2, const QuadratureSpec& spec = {});

/// int_0^inf y^k exp(xi1 y + xi2 y^2) dy, same rule as quad_A.
OracleValue quad_moment(int k, double xi1, double xi2, const QuadratureSpec& spec = {});

/// Central differences with h_i = h * max(1, |x_i|).
Vector fd_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6);

/// Column j holds the central difference of F along e_j.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                   double h = 1e-6);

/// KL(p || q) for independent positive-truncated normals with natural
/// parameters xi = (xi^1..xi^n, xi^{n+1}), summed over observations; each
/// term is integrated directly as int p log(p / q).
OracleValue brute_divergence(const Vector& xi_p, const Vector& xi_q,
                             const QuadratureSpec& spec = {});

}  // namespace helars::validation
