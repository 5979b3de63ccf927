#pragma once

#include <functional>

#include "helars/types.hpp"

namespace helars {

class Model;
class DesignBlock;
struct NewtonOptions;

struct TransportOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int checkpoints = 2;   // equal sub-segments, each integrated adaptively
    int max_steps = 10000;  // accepted plus rejected steps, whole segment
    bool closed_form = false;  // replace transport by Model::oracle_aux

    void validate() const;
};

/// dL/d(coords) as a function of (coords, L); shape aux.size() x coords.size().
using DerivativeField = std::function<Matrix(const Vector& coords, const Vector& aux)>;

/// Integrates L along coords(t) = start + t (end - start), t in [0, 1], with
/// the Dormand-Prince 5(4) pair and a PI step-size controller.
Vector integrate_segment(const DerivativeField& field, const Vector& start,
                         const Vector& aux_start, const Vector& end,
                         const TransportOptions& opts = {});

/// L(theta_new) from L(theta_old) along the straight theta segment.
Vector transport_theta(const Model& model, const DesignBlock& design, const Vector& theta_old,
                       const Vector& aux_old, const Vector& theta_new,
                       const TransportOptions& opts = {});

/// L(rho_new) from L(rho_old) along the straight segment in mixed
/// coordinates. `theta_hint` is the theta of rho_old (or a nearby guess)
/// and seeds the first internal recovery.
Vector transport_mixed(const Model& model, const DesignBlock& design, const MixedPoint& rho_old,
                       const Vector& aux_old, const MixedPoint& rho_new,
                       const Vector& theta_hint, const TransportOptions& opts,
                       const NewtonOptions& newton);

}  // namespace helars
