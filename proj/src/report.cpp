#include "helars/report.hpp"

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "helars/error.hpp"

namespace helars {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

double to_double(const std::string& cell, std::size_t row, std::size_t col) {
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
        std::ostringstream msg;
        msg << "path file row " << row << ", column " << col << ": bad number '" << cell << "'";
        fail(ErrorKind::ParseError, msg.str());
    }
    return value;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void write_path_csv(std::ostream& out, const SelectionPath& path) {
    if (path.steps.empty()) return;
    const Index dim = path.steps.front().theta.size();
    out << "step,div_ratio";
    for (Index j = 0; j < dim; ++j) out << ",theta_" << j;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (const PathStep& step : path.steps) {
        out << step.k << ',' << step.divergence_ratio;
        for (Index j = 0; j < dim; ++j) out << ',' << step.theta(j);
        out << '\n';
    }
    out.precision(old_precision);
}

SelectionPath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::ParseError, "empty path file");
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "step" || header[1] != "div_ratio") {
        fail(ErrorKind::ParseError, "path file header must start with step,div_ratio");
    }
    const Index dim = static_cast<Index>(header.size()) - 2;

    SelectionPath path;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            fail(ErrorKind::ParseError, "path file row " + std::to_string(row) + " has " +
                                            std::to_string(cells.size()) + " cells");
        }
        PathStep step;
        step.k = static_cast<Index>(to_double(cells[0], row, 1));
        step.divergence_ratio = to_double(cells[1], row, 2);
        step.theta.resize(dim);
        for (Index j = 0; j < dim; ++j) {
            step.theta(j) = to_double(cells[static_cast<std::size_t>(j) + 2], row,
                                      static_cast<std::size_t>(j) + 3);
        }
        path.steps.push_back(std::move(step));
    }
    path.removal_order = covariate_order(path);
    return path;
}

void write_plot_csv(std::ostream& out, const SelectionPath& path,
                    const std::vector<std::string>& covariate_names) {
    out << "div_ratio";
    for (const auto& name : covariate_names) out << ',' << name;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (const PathStep& step : path.steps) {
        out << step.divergence_ratio;
        for (std::size_t j = 0; j < covariate_names.size(); ++j) {
            out << ',' << step.theta(static_cast<Index>(j) + 1);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

nlohmann::json mle_json(const MleResult& fit) {
    return {{"theta", to_std(fit.theta)},
            {"loglike", fit.loglike},
            {"grad_norm", fit.grad_norm},
            {"iterations", fit.iterations}};
}

nlohmann::json config_json(const SelectionConfig& config) {
    return {{"bisection_tol", config.bisection_tol},
            {"bisection_max", config.bisection_max},
            {"rtol", config.transport.rel_tol},
            {"atol", config.transport.abs_tol},
            {"checkpoints", config.transport.checkpoints},
            {"max_steps", config.transport.max_steps},
            {"oracle", config.transport.closed_form}};
}

nlohmann::json path_summary(const SelectionPath& path, const Dataset& data,
                            const std::string& model, const MleResult& full,
                            const SelectionConfig& config) {
    nlohmann::json names = nlohmann::json::array();
    for (Index i : path.removal_order) {
        names.push_back(data.covariate_names.at(static_cast<std::size_t>(i - 1)));
    }
    nlohmann::json ratios = nlohmann::json::array();
    for (const PathStep& step : path.steps) ratios.push_back(step.divergence_ratio);
    return {{"model", model},
            {"n", data.n()},
            {"d", data.d()},
            {"response", data.response_name},
            {"removal_order", path.removal_order},
            {"removal_order_names", names},
            {"divergence_ratios", ratios},
            {"mle", mle_json(full)},
            {"config", config_json(config)}};
}

}  // namespace helars
