#include "helars/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "helars/error.hpp"

namespace helars {

namespace {

std::vector<std::string> split_line(const std::string& line, bool comma) {
    std::vector<std::string> cells;
    if (comma) {
        std::string cell;
        std::istringstream in(line);
        while (std::getline(in, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
    } else {
        std::istringstream in(line);
        std::string cell;
        while (in >> cell) cells.push_back(cell);
    }
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\"'");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\"'");
    return s.substr(first, last - first + 1);
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col,
                  const std::string& name) {
    const std::string cell = trim(raw);
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "row " << row << ", column " << col << " (" << name << "): '" << cell
            << "' is not a finite number";
        fail(ErrorKind::ParseError, msg.str());
    }
    return value;
}

struct ColumnStats {
    double mean;
    double sd;
};

ColumnStats column_stats(const Vector& v) {
    const double mean = v.mean();
    const double ss = (v.array() - mean).square().sum();
    return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace

Dataset ingest(std::istream& in, const std::string& response, bool require_positive) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) break;
    }
    if (blank(line)) fail(ErrorKind::ParseError, "missing header row");

    const bool comma = line.find(',') != std::string::npos;
    std::vector<std::string> header = split_line(line, comma);
    for (auto& name : header) name = trim(name);
    if (header.size() < 2) {
        fail(ErrorKind::ParseError, "need at least one covariate and a response column");
    }

    std::size_t response_col = header.size() - 1;
    if (!response.empty()) {
        response_col = header.size();
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == response) response_col = c;
        }
        if (response_col == header.size()) {
            fail(ErrorKind::InvalidArgument, "response column '" + response + "' not found");
        }
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto cells = split_line(line, comma);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << line_no << ": expected " << header.size() << " cells, found "
                << cells.size();
            fail(ErrorKind::ParseError, msg.str());
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values[c] = parse_cell(cells[c], line_no, c + 1, header[c]);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) fail(ErrorKind::ParseError, "no data rows");

    Dataset data;
    data.response_name = header[response_col];
    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(header.size()) - 1;
    data.x.resize(n, d);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == response_col) {
                data.y(i) = rows[static_cast<std::size_t>(i)][c];
            } else {
                data.x(i, j++) = rows[static_cast<std::size_t>(i)][c];
            }
        }
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != response_col) data.covariate_names.push_back(header[c]);
    }
    data.scaling.center = Vector::Zero(d);
    data.scaling.scale = Vector::Ones(d);

    if (require_positive) {
        std::ostringstream bad;
        int count = 0;
        for (Index i = 0; i < n; ++i) {
            if (!(data.y(i) > 0.0)) bad << (count++ ? ", " : "") << (i + 1);
        }
        if (count > 0) {
            fail(ErrorKind::NonPositiveResponse,
                 "response must be positive; offending data rows: " + bad.str());
        }
    }
    return data;
}

Dataset ingest_file(const std::string& path, const std::string& response, bool require_positive) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    return ingest(in, response, require_positive);
}

Dataset standardize(const Dataset& data, bool center_response) {
    Dataset out = data;
    for (Index j = 0; j < data.d(); ++j) {
        const auto [mean, sd] = column_stats(data.x.col(j));
        if (!(sd > 0.0)) {
            const std::string name = static_cast<std::size_t>(j) < data.covariate_names.size()
                                         ? data.covariate_names[static_cast<std::size_t>(j)]
                                         : std::to_string(j + 1);
            fail(ErrorKind::ZeroVariance, "covariate '" + name + "' has zero variance");
        }
        out.x.col(j) = (data.x.col(j).array() - mean) / sd;
        out.scaling.center(j) = data.scaling.center(j) + data.scaling.scale(j) * mean;
        out.scaling.scale(j) = data.scaling.scale(j) * sd;
    }

    const auto [mean, sd] = column_stats(data.y);
    if (!(sd > 0.0)) fail(ErrorKind::ZeroVariance, "response has zero variance");
    const double shift = center_response ? mean : 0.0;
    out.y = (data.y.array() - shift) / sd;
    out.scaling.response_center =
        data.scaling.response_center + data.scaling.response_scale * shift;
    out.scaling.response_scale = data.scaling.response_scale * sd;
    return out;
}

Vector theta_to_raw(const Vector& theta, const Scaling& scaling) {
    const Index d = scaling.scale.size();
    if (theta.size() != d + 2) {
        fail(ErrorKind::InvalidArgument, "theta_to_raw expects d + 2 coordinates");
    }
    const double sy = scaling.response_scale;
    const double my = scaling.response_center;
    Vector raw(theta.size());
    double intercept = theta(0);
    for (Index j = 1; j <= d; ++j) {
        raw(j) = theta(j) / (scaling.scale(j - 1) * sy);
        intercept -= theta(j) * scaling.center(j - 1) / scaling.scale(j - 1);
    }
    const double quad = theta(d + 1);
    raw(0) = intercept / sy - 2.0 * my * quad / (sy * sy);
    raw(d + 1) = quad / (sy * sy);
    return raw;
}

double aux_shift_to_raw(const Scaling& scaling) {
    return std::log(scaling.response_scale);
}

Dataset simulate(const SimulationSpec& spec) {
    if (spec.n < 1 || spec.d < 3) {
        fail(ErrorKind::InvalidArgument, "simulate needs n >= 1 and d >= 3");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.25);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset data;
    data.x.resize(spec.n, spec.d);
    data.y.resize(spec.n);
    for (Index i = 0; i < spec.n; ++i) {
        for (Index j = 0; j < spec.d; ++j) data.x(i, j) = unif(rng);
        if (spec.correlated) data.x(i, 1) = data.x(i, 0) + noise(rng);
    }
    for (Index i = 0; i < spec.n; ++i) {
        const double mean = data.x(i, 0) + data.x(i, 1) + data.x(i, 2);
        double y;
        do {
            y = mean + gauss(rng);
        } while (!(y > 0.0));
        data.y(i) = y;
    }
    for (Index j = 0; j < spec.d; ++j) data.covariate_names.push_back("X" + std::to_string(j + 1));
    data.response_name = "y";
    data.scaling.center = Vector::Zero(spec.d);
    data.scaling.scale = Vector::Ones(spec.d);
    return data;
}

}  // namespace helars
