#pragma once

#include <vector>

#include <Eigen/Dense>

namespace helars {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Selects the dual role of each entry of a mixed coordinate vector:
/// true marks an eta (m-affine) entry, false a theta (e-affine) entry.
using Mask = std::vector<bool>;

/// A point of the model manifold in theta coordinates together with the
/// per-observation log-normalizers L evaluated there. Models without a
/// holonomic part carry an empty aux vector.
struct ModelPoint {
    Vector theta;
    Vector aux;
};

struct MixedPoint {
    Vector values;
    Mask eta_mask;
};

}  // namespace helars
