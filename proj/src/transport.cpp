#include "helars/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "helars/error.hpp"
#include "helars/geometry.hpp"
#include "helars/models.hpp"

namespace helars {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192,
                 kA75 = -2187.0 / 6784, kA76 = 11.0 / 84;
// fifth-order weights minus embedded fourth-order weights
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kMinStep = 1e-12;

class SegmentIntegrator {
public:
    SegmentIntegrator(const DerivativeField& field, const Vector& start, const Vector& end,
                      const TransportOptions& opts)
        : field_(field), start_(start), direction_(end - start), opts_(opts) {}

    Vector run(const Vector& aux_start) {
        Vector y = aux_start;
        Vector k1 = rhs(0.0, y);
        double h = initial_step(y, k1, 1.0 / opts_.checkpoints);
        for (int c = 0; c < opts_.checkpoints; ++c) {
            const double t_end = (c + 1 == opts_.checkpoints)
                                     ? 1.0
                                     : static_cast<double>(c + 1) / opts_.checkpoints;
            advance(y, k1, h, t_end);
        }
        return y;
    }

private:
    Vector rhs(double t, const Vector& y) {
        const Vector coords = start_ + t * direction_;
        const Matrix jac = field_(coords, y);
        if (jac.rows() != y.size() || jac.cols() != coords.size()) {
            std::ostringstream msg;
            msg << "derivative field returned " << jac.rows() << "x" << jac.cols()
                << ", expected " << y.size() << "x" << coords.size();
            fail(ErrorKind::InvalidArgument, msg.str());
        }
        if (!jac.allFinite()) {
            fail(ErrorKind::NonFiniteDerivative,
                 "derivative field is not finite; the path left the model domain");
        }
        return jac * direction_;
    }

    double error_norm(const Vector& y, const Vector& y_new, const Vector& err) const {
        const Eigen::ArrayXd scale =
            opts_.abs_tol + opts_.rel_tol * y.array().abs().max(y_new.array().abs());
        return std::sqrt((err.array() / scale).square().mean());
    }

    // Hairer-Wanner starting step.
    double initial_step(const Vector& y, const Vector& f0, double span) {
        const Eigen::ArrayXd scale = opts_.abs_tol + opts_.rel_tol * y.array().abs();
        const double d0 = std::sqrt((y.array() / scale).square().mean());
        const double d1 = std::sqrt((f0.array() / scale).square().mean());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        const Vector f1 = rhs(h0, y + h0 * f0);
        const double d2 = std::sqrt((((f1 - f0).array()) / scale).square().mean()) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    void advance(Vector& y, Vector& k1, double& h, double t_end) {
        bool last_rejected = false;
        while (t_ < t_end) {
            if (t_ + h >= t_end || t_end - (t_ + h) < 1e-12) h = t_end - t_;
            if (++steps_ > opts_.max_steps) {
                std::ostringstream msg;
                msg << "transport exceeded " << opts_.max_steps << " steps at t = " << t_;
                fail(ErrorKind::StepLimitExceeded, msg.str());
            }
            const double t_new = (h == t_end - t_) ? t_end : t_ + h;
            Vector y_new;
            Vector k7;
            double norm;
            try {
                const Vector k2 = rhs(t_ + kC[1] * h, y + h * kA21 * k1);
                const Vector k3 = rhs(t_ + kC[2] * h, y + h * (kA31 * k1 + kA32 * k2));
                const Vector k4 =
                    rhs(t_ + kC[3] * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
                const Vector k5 = rhs(t_ + kC[4] * h,
                                      y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
                const Vector k6 =
                    rhs(t_ + kC[5] * h,
                        y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
                y_new = y + h * (kA71 * k1 + kA73 * k3 + kA74 * k4 + kA75 * k5 + kA76 * k6);
                k7 = rhs(t_new, y_new);
                const Vector err =
                    h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
                norm = error_norm(y, y_new, err);
            } catch (const Error& e) {
                // An overshooting trial stage can leave the region where the
                // field is finite; retry with a shorter step.
                if (e.kind() != ErrorKind::NonFiniteDerivative || h < kMinStep) throw;
                norm = std::numeric_limits<double>::infinity();
            }
            if (!std::isfinite(norm)) {
                if (h < kMinStep) {
                    fail(ErrorKind::NonFiniteDerivative, "transport produced a non-finite state");
                }
                h *= kMinFactor;
                last_rejected = true;
                continue;
            }
            if (norm <= 1.0) {
                t_ = t_new;
                y = y_new;
                k1 = k7;
                const double e = std::max(norm, 1e-10);
                double factor = kSafety * std::pow(e, -kAlpha) * std::pow(err_old_, kBeta);
                factor = std::clamp(factor, kMinFactor, kMaxFactor);
                if (last_rejected) factor = std::min(factor, 1.0);
                h *= factor;
                err_old_ = std::max(norm, 1e-4);
                last_rejected = false;
            } else {
                h *= std::max(kMinFactor, kSafety * std::pow(norm, -0.2));
                last_rejected = true;
                if (h < kMinStep) {
                    std::ostringstream msg;
                    msg << "transport step size collapsed at t = " << t_
                        << "; the field is too stiff along this segment";
                    fail(ErrorKind::StepLimitExceeded, msg.str());
                }
            }
        }
    }

    const DerivativeField& field_;
    Vector start_;
    Vector direction_;
    const TransportOptions& opts_;
    double t_ = 0.0;
    double err_old_ = 1e-4;
    int steps_ = 0;
};

}  // namespace

void TransportOptions::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || checkpoints < 1 || max_steps < 1) {
        fail(ErrorKind::InvalidArgument,
             "transport options need rel_tol > 0, abs_tol > 0, checkpoints >= 1, max_steps >= 1");
    }
}

Vector integrate_segment(const DerivativeField& field, const Vector& start,
                         const Vector& aux_start, const Vector& end,
                         const TransportOptions& opts) {
    opts.validate();
    if (start.size() != end.size()) {
        fail(ErrorKind::InvalidArgument, "integrate_segment: start and end differ in length");
    }
    if (!aux_start.allFinite()) {
        fail(ErrorKind::InvalidArgument, "integrate_segment: initial aux is not finite");
    }
    if (aux_start.size() == 0 || start == end) return aux_start;
    SegmentIntegrator integrator(field, start, end, opts);
    return integrator.run(aux_start);
}

Vector transport_theta(const Model& model, const DesignBlock& design, const Vector& theta_old,
                       const Vector& aux_old, const Vector& theta_new,
                       const TransportOptions& opts) {
    model.require_domain(design.xi(theta_old));
    model.require_domain(design.xi(theta_new));
    if (opts.closed_form) return model.oracle_aux(design.xi(theta_new));
    const DerivativeField field = [&](const Vector& theta, const Vector& aux) {
        return aux_gradient_theta(model, design, theta, aux);
    };
    return integrate_segment(field, theta_old, aux_old, theta_new, opts);
}

Vector transport_mixed(const Model& model, const DesignBlock& design, const MixedPoint& rho_old,
                       const Vector& aux_old, const MixedPoint& rho_new,
                       const Vector& theta_hint, const TransportOptions& opts,
                       const NewtonOptions& newton) {
    if (rho_old.eta_mask != rho_new.eta_mask ||
        rho_old.values.size() != rho_new.values.size() ||
        static_cast<Index>(rho_old.eta_mask.size()) != rho_old.values.size()) {
        fail(ErrorKind::InvalidArgument, "transport_mixed: endpoints must share one mask");
    }
    if (opts.closed_form) {
        const FullPoint target =
            mixed_to_full_closed_form(model, design, rho_new, theta_hint, newton);
        return model.oracle_aux(design.xi(target.theta));
    }
    if (aux_old.size() == 0 || rho_old.values == rho_new.values) return aux_old;

    const Mask& mask = rho_old.eta_mask;
    Vector seed = mixed_to_full(model, design, rho_old, aux_old, theta_hint, newton).theta;
    const DerivativeField field = [&](const Vector& rho, const Vector& aux) -> Matrix {
        const FullPoint full = mixed_to_full(model, design, MixedPoint{rho, mask}, aux, seed, newton);
        seed = full.theta;
        return aux_gradient_theta(model, design, full.theta, aux) *
               dtheta_drho(model, design, full.theta, aux, mask);
    };
    return integrate_segment(field, rho_old.values, aux_old, rho_new.values, opts);
}

}  // namespace helars
