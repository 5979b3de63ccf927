#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "helars/types.hpp"

namespace helars {

/// Per-column affine maps applied by standardize(). Standardized values are
/// (raw - center) / scale.
struct Scaling {
    Vector center;                // covariates
    Vector scale;                 // covariates, sd with divisor n - 1
    double response_center = 0.0;  // nonzero only when the response is centered
    double response_scale = 1.0;
};

struct Dataset {
    std::vector<std::string> covariate_names;
    std::string response_name;
    Matrix x;  // n x d
    Vector y;  // n
    Scaling scaling;  // identity until standardize() runs

    Index n() const { return x.rows(); }
    Index d() const { return x.cols(); }
};

/// Reads a table with a header row. The delimiter is a comma if the header
/// contains one, whitespace otherwise. An empty `response` selects the last
/// column. With `require_positive`, every response value must be > 0.
Dataset ingest(std::istream& in, const std::string& response = {},
               bool require_positive = false);
Dataset ingest_file(const std::string& path, const std::string& response = {},
                    bool require_positive = false);

/// Centers and scales every covariate column; scales the response by its sd
/// and, with `center_response`, also centers it. Scalings compose, so the
/// stored maps always lead back to the raw data.
Dataset standardize(const Dataset& data, bool center_response);

/// theta in standardized coordinates -> theta for the raw data (r = 1).
Vector theta_to_raw(const Vector& theta, const Scaling& scaling);

/// Log-normalizer shift that accompanies theta_to_raw: L_raw = L + shift.
double aux_shift_to_raw(const Scaling& scaling);

struct SimulationSpec {
    Index n = 1000;
    Index d = 3;
    bool correlated = false;  // X2 = X1 + eps, eps ~ N(0, sd 1/4)
    std::uint64_t seed = 0;
};

/// Uniform(0, 1) covariates; the response is normal with mean X1 + X2 + X3
/// and unit variance, truncated to (0, inf) by rejection.
Dataset simulate(const SimulationSpec& spec);

}  // namespace helars
